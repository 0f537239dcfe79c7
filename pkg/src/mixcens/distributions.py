"""Weibull lifetime model, its order statistics, and two comparator families.

The Weibull family is parametrised by a shape ``gamma`` and a rate-like
``delta``::

    f(x) = gamma * delta * x**(gamma - 1) * exp(-delta * x**gamma)
    F(x) = 1 - exp(-delta * x**gamma)

so that ``delta = scale**(-gamma)`` in the usual (shape, scale) notation.
All functions accept scalars or arrays and return a float for scalar input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

__all__ = [
    "WeibullParams",
    "LindleyParams",
    "InverseWeibullParams",
    "weibull_logpdf",
    "weibull_pdf",
    "weibull_cdf",
    "weibull_sf",
    "weibull_quantile",
    "weibull_hazard",
    "log_binom",
    "order_stat_logpdf",
    "order_stat_pdf",
    "order_stat_cdf",
    "lindley_logpdf",
    "lindley_pdf",
    "lindley_cdf",
    "invweibull_logpdf",
    "invweibull_pdf",
    "invweibull_cdf",
    "invweibull_quantile",
    "sample_weibull",
]


def _positive(name, value):
    value = float(value)
    if not (value > 0 and np.isfinite(value)):
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return value


@dataclass(frozen=True)
class WeibullParams:
    """Shape ``gamma`` and rate-like ``delta`` (units time**-gamma)."""

    gamma: float
    delta: float

    def __post_init__(self):
        object.__setattr__(self, "gamma", _positive("gamma", self.gamma))
        object.__setattr__(self, "delta", _positive("delta", self.delta))

    @property
    def scale(self):
        """Conventional scale ``delta**(-1/gamma)``."""
        return self.delta ** (-1.0 / self.gamma)

    def rescaled(self, alpha):
        """Parameters of ``alpha * X`` when ``X`` follows ``self``."""
        alpha = _positive("alpha", alpha)
        return WeibullParams(self.gamma, self.delta / alpha**self.gamma)


@dataclass(frozen=True)
class LindleyParams:
    """One-parameter Lindley, ``f(x) = theta**2/(1+theta) (1+x) exp(-theta x)``."""

    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", _positive("theta", self.theta))


@dataclass(frozen=True)
class InverseWeibullParams:
    """Inverse Weibull with ``F(x) = exp(-delta x**(-gamma))``."""

    gamma: float
    delta: float

    def __post_init__(self):
        object.__setattr__(self, "gamma", _positive("gamma", self.gamma))
        object.__setattr__(self, "delta", _positive("delta", self.delta))


def _ret(arr):
    arr = np.asarray(arr, dtype=float)
    return float(arr) if arr.ndim == 0 else arr


def _require_positive(x, name="x"):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError(f"{name} must be > 0")
    return x


def weibull_logpdf(x, p: WeibullParams):
    x = _require_positive(x)
    g, d = p.gamma, p.delta
    return _ret(np.log(g) + np.log(d) + (g - 1.0) * np.log(x) - d * x**g)


def weibull_pdf(x, p: WeibullParams):
    """Weibull density; raises ``ValueError`` for ``x <= 0``."""
    return _ret(np.exp(weibull_logpdf(x, p)))


def weibull_cdf(x, p: WeibullParams):
    """Weibull CDF, extended by zero on ``x <= 0``."""
    x = np.asarray(x, dtype=float)
    xp = np.where(x > 0, x, 0.0)
    return _ret(np.where(x > 0, -np.expm1(-p.delta * xp**p.gamma), 0.0))


def weibull_sf(x, p: WeibullParams):
    x = np.asarray(x, dtype=float)
    xp = np.where(x > 0, x, 0.0)
    return _ret(np.where(x > 0, np.exp(-p.delta * xp**p.gamma), 1.0))


def weibull_quantile(u, p: WeibullParams):
    """Inverse of :func:`weibull_cdf` on ``(0, 1)``."""
    u = np.asarray(u, dtype=float)
    if np.any(~((u > 0) & (u < 1))):
        raise ValueError("u must lie strictly inside (0, 1)")
    return _ret((-np.log1p(-u) / p.delta) ** (1.0 / p.gamma))


def weibull_hazard(t, p: WeibullParams):
    t = _require_positive(t, "t")
    return _ret(p.gamma * p.delta * t ** (p.gamma - 1.0))


def log_binom(n, k):
    """``log C(n, k)`` through log-gamma; valid for large ``n``."""
    return special.gammaln(n + 1.0) - special.gammaln(k + 1.0) - special.gammaln(n - k + 1.0)


def _check_index(i, n):
    if int(n) != n or n < 1:
        raise IndexError(f"sample size must be a positive integer, got {n!r}")
    if int(i) != i or not 1 <= i <= n:
        raise IndexError(f"order index {i!r} outside 1..{n}")
    return int(i), int(n)


def order_stat_logpdf(t, i, n, p: WeibullParams):
    i, n = _check_index(i, n)
    t = _require_positive(t, "t")
    g, d = p.gamma, p.delta
    z = d * t**g
    out = (
        np.log(i) + log_binom(n, i) + np.log(g) + np.log(d) + (g - 1.0) * np.log(t)
        - z * (n - i + 1)
    )
    if i > 1:
        with np.errstate(divide="ignore"):
            out = out + (i - 1) * np.log(-np.expm1(-z))
    return _ret(out)


def order_stat_pdf(t, i, n, p: WeibullParams):
    """Density of the ``i``-th smallest of ``n`` i.i.d. Weibull lifetimes."""
    return _ret(np.exp(order_stat_logpdf(t, i, n, p)))


def order_stat_cdf(x, i, n, p: WeibullParams):
    """CDF of the ``i``-th order statistic, ``sum_{j>=i} C(n,j) F^j (1-F)^(n-j)``.

    Evaluated as the regularised incomplete beta ``I_F(i, n-i+1)``, which is
    the same binomial tail without cancellation.
    """
    i, n = _check_index(i, n)
    F = np.asarray(weibull_cdf(x, p), dtype=float)
    return _ret(special.betainc(i, n - i + 1, F))


# -- comparators --------------------------------------------------------------

def lindley_logpdf(x, p: LindleyParams):
    x = _require_positive(x)
    th = p.theta
    return _ret(2.0 * np.log(th) - np.log1p(th) + np.log1p(x) - th * x)


def lindley_pdf(x, p: LindleyParams):
    return _ret(np.exp(lindley_logpdf(x, p)))


def lindley_cdf(x, p: LindleyParams):
    x = np.asarray(x, dtype=float)
    th = p.theta
    xp = np.where(x > 0, x, 0.0)
    with np.errstate(over="ignore", invalid="ignore"):
        sf = (1.0 + th * xp / (1.0 + th)) * np.exp(-th * xp)
    sf = np.where(np.isfinite(xp), sf, 0.0)
    return _ret(np.where(x > 0, 1.0 - sf, 0.0))


def invweibull_logpdf(x, p: InverseWeibullParams):
    x = _require_positive(x)
    g, d = p.gamma, p.delta
    return _ret(np.log(g) + np.log(d) - (g + 1.0) * np.log(x) - d * x ** (-g))


def invweibull_pdf(x, p: InverseWeibullParams):
    return _ret(np.exp(invweibull_logpdf(x, p)))


def invweibull_cdf(x, p: InverseWeibullParams):
    x = np.asarray(x, dtype=float)
    xp = np.where(x > 0, x, 1.0)
    return _ret(np.where(x > 0, np.exp(-p.delta * xp ** (-p.gamma)), 0.0))


def invweibull_quantile(u, p: InverseWeibullParams):
    u = np.asarray(u, dtype=float)
    if np.any(~((u > 0) & (u < 1))):
        raise ValueError("u must lie strictly inside (0, 1)")
    return _ret((-np.log(u) / p.delta) ** (-1.0 / p.gamma))


# -- sampling -----------------------------------------------------------------

def sample_weibull(count, p: WeibullParams, rng_seed=None):
    """Draw ``count`` i.i.d. Weibull lifetimes by inverse-CDF transform.

    ``rng_seed`` may be anything :func:`numpy.random.default_rng` accepts
    (int, ``SeedSequence``, ``Generator``). Same seed, same draws.
    """
    count = int(count)
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(rng_seed)
    u = rng.random(count)
    # u == 0 would map to x == 0; lift it to the smallest positive double
    u = np.maximum(u, np.finfo(float).tiny)
    return (-np.log1p(-u) / p.delta) ** (1.0 / p.gamma)
