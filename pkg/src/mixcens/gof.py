"""Goodness of fit for complete samples: KS test and information criteria.

Weibull is compared against the one-parameter Lindley and the inverse
Weibull. ``nll2`` is ``-2 * max log-likelihood``, the quantity the criteria
are built on (AIC = 2k + nll2, BIC = k log n + nll2, ...).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import special

from .censoring import CensoringScheme, apply_scheme
from .distributions import (
    InverseWeibullParams,
    LindleyParams,
    WeibullParams,
    invweibull_cdf,
    invweibull_logpdf,
    invweibull_pdf,
    invweibull_quantile,
    lindley_cdf,
    lindley_logpdf,
    lindley_pdf,
    weibull_cdf,
    weibull_logpdf,
    weibull_pdf,
    weibull_quantile,
)
from .exceptions import DataError, DegenerateDataError
from .mle import MleConfig, fit_mle

__all__ = [
    "FitReport",
    "kolmogorov_sf",
    "ks_test",
    "information_criteria",
    "fit_weibull",
    "fit_lindley",
    "fit_invweibull",
    "lindley_quantile",
    "fit_report",
    "goodness_of_fit_table",
    "plot_points",
    "export_plot_data",
]

MODELS = ("Weibull", "Lindley", "InverseWeibull")


@dataclass(frozen=True)
class FitReport:
    model: str
    estimates: tuple
    ks_stat: float
    p_value: float
    loglik: float
    nll2: float
    aic: float
    aicc: float
    bic: float
    hqc: float

    @property
    def params(self):
        return _PARAM_TYPES[self.model](*self.estimates)

    def to_record(self):
        return {
            "model": self.model,
            "estimates": list(self.estimates),
            "ks": self.ks_stat,
            "p_value": self.p_value,
            "aic": self.aic,
            "aicc": self.aicc,
            "bic": self.bic,
            "hqc": self.hqc,
            "-2logL": self.nll2,
        }


_PARAM_TYPES = {"Weibull": WeibullParams, "Lindley": LindleyParams, "InverseWeibull": InverseWeibullParams}


def kolmogorov_sf(t, tol=1e-12):
    """``P(K > t)`` for the limiting Kolmogorov distribution.

    Uses ``2 sum_{j>=1} (-1)^(j-1) exp(-2 j^2 t^2)`` for ``t >= 1`` and the
    dual theta-function series for the CDF below that, where the
    alternating series converges slowly. Terms are summed until they drop
    below ``tol``.
    """
    t = float(t)
    if t <= 0:
        return 1.0
    if t >= 1.0:
        total, j = 0.0, 1
        while True:
            term = 2.0 * math.exp(-2.0 * j * j * t * t)
            total += term if j % 2 else -term
            if term < tol:
                break
            j += 1
        return min(max(total, 0.0), 1.0)
    total, j = 0.0, 1
    c = math.pi**2 / (8.0 * t * t)
    while True:
        term = math.exp(-(2 * j - 1) ** 2 * c)
        total += term
        if term < tol:
            break
        j += 1
    cdf = math.sqrt(2.0 * math.pi) / t * total
    return min(max(1.0 - cdf, 0.0), 1.0)


def ks_test(data, cdf):
    """One-sample KS statistic against ``cdf`` and its asymptotic p-value."""
    x = np.sort(np.asarray(data, dtype=float))
    n = x.size
    if n == 0:
        raise DataError("ks_test needs at least one observation")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    D = float(max(np.max(np.abs(F - i / n)), np.max(np.abs(F - (i - 1) / n))))
    return D, kolmogorov_sf(math.sqrt(n) * D)


def information_criteria(nll2, k, n):
    """``(aic, aicc, bic, hqc)`` from ``-2 logL``, parameter count and size."""
    if n <= k + 1:
        raise ValueError(f"AICC undefined for n={n} <= k+1={k + 1}")
    aic = 2 * k + nll2
    aicc = aic + 2 * k * (k + 1) / (n - k - 1)
    bic = k * math.log(n) + nll2
    hqc = 2 * k * math.log(math.log(n)) + nll2
    return aic, aicc, bic, hqc


def _positive_data(data):
    x = np.asarray(data, dtype=float).ravel()
    if x.size == 0 or not np.all(x > 0) or not np.all(np.isfinite(x)):
        raise DataError("data must be a nonempty array of positive numbers")
    return x


def fit_weibull(data, config: MleConfig | None = None) -> WeibullParams:
    x = _positive_data(data)
    sample = apply_scheme(x, CensoringScheme(x.size, x.size, 0.0))
    return fit_mle(sample, config).params


def fit_lindley(data) -> LindleyParams:
    """Closed-form Lindley MLE."""
    x = _positive_data(data)
    xb = float(x.mean())
    theta = (-(xb - 1.0) + math.sqrt((xb - 1.0) ** 2 + 8.0 * xb)) / (2.0 * xb)
    return LindleyParams(theta)


def fit_invweibull(data, config: MleConfig | None = None) -> InverseWeibullParams:
    """Inverse Weibull MLE: if ``X`` is IW then ``1/X`` is Weibull with the same parameters."""
    x = _positive_data(data)
    if np.unique(x).size < 2:
        raise DegenerateDataError("inverse Weibull fit needs at least two distinct values")
    wp = fit_weibull(1.0 / x, config)
    return InverseWeibullParams(wp.gamma, wp.delta)


def lindley_quantile(u, p: LindleyParams):
    """Lindley quantile through the ``W_{-1}`` branch of Lambert's function."""
    u = np.asarray(u, dtype=float)
    if np.any(~((u > 0) & (u < 1))):
        raise ValueError("u must lie strictly inside (0, 1)")
    th = p.theta
    arg = (1.0 + th) * (u - 1.0) * math.exp(-(1.0 + th))
    x = -1.0 - 1.0 / th - np.real(special.lambertw(arg, -1)) / th
    return float(x) if x.ndim == 0 else x


def _functions(model, params):
    if model == "Weibull":
        return (lambda x: weibull_pdf(x, params), lambda x: weibull_cdf(x, params),
                lambda u: weibull_quantile(u, params), lambda x: weibull_logpdf(x, params))
    if model == "Lindley":
        return (lambda x: lindley_pdf(x, params), lambda x: lindley_cdf(x, params),
                lambda u: lindley_quantile(u, params), lambda x: lindley_logpdf(x, params))
    if model == "InverseWeibull":
        return (lambda x: invweibull_pdf(x, params), lambda x: invweibull_cdf(x, params),
                lambda u: invweibull_quantile(u, params), lambda x: invweibull_logpdf(x, params))
    raise ValueError(f"unknown model {model!r}")


def fit_report(data, model="Weibull") -> FitReport:
    x = _positive_data(data)
    if model == "Weibull":
        params = fit_weibull(x)
        estimates = (params.gamma, params.delta)
    elif model == "Lindley":
        params = fit_lindley(x)
        estimates = (params.theta,)
    elif model == "InverseWeibull":
        params = fit_invweibull(x)
        estimates = (params.gamma, params.delta)
    else:
        raise ValueError(f"unknown model {model!r}")
    _, cdf, _, logpdf = _functions(model, params)
    loglik = float(np.sum(logpdf(x)))
    nll2 = -2.0 * loglik
    D, pval = ks_test(x, cdf)
    aic, aicc, bic, hqc = information_criteria(nll2, len(estimates), x.size)
    return FitReport(model, estimates, D, pval, loglik, nll2, aic, aicc, bic, hqc)


def goodness_of_fit_table(data, models=MODELS):
    return [fit_report(data, m) for m in models]


def plot_points(data, report: FitReport, plotting_position="i/(n+1)", grid_size=200, bins="sturges"):
    """Point sets behind the density, CDF, PP and QQ panels.

    Returns a dict mapping panel name to ``(header, array of shape (k, 2))``.
    """
    x = np.sort(_positive_data(data))
    n = x.size
    pdf, cdf, quantile, _ = _functions(report.model, report.params)
    i = np.arange(1, n + 1)
    if plotting_position == "i/(n+1)":
        pp = i / (n + 1.0)
    elif plotting_position == "(i-0.5)/n":
        pp = (i - 0.5) / n
    else:
        raise ValueError(f"unknown plotting position {plotting_position!r}")

    hi = x[-1] * 1.1
    grid = np.linspace(hi / grid_size, hi, grid_size)
    heights, edges = np.histogram(x, bins=bins, density=True)
    mids = 0.5 * (edges[:-1] + edges[1:])
    return {
        "density": (("x", "fitted_pdf"), np.column_stack([grid, pdf(grid)])),
        "histogram": (("bin_mid", "height"), np.column_stack([mids, heights])),
        "ecdf": (("x", "empirical_cdf"), np.column_stack([x, i / n])),
        "cdf": (("x", "fitted_cdf"), np.column_stack([grid, cdf(grid)])),
        "pp": (("fitted_cdf", "plotting_position"), np.column_stack([cdf(x), pp])),
        "qq": (("theoretical_quantile", "observed"), np.column_stack([quantile(pp), x])),
    }


def export_plot_data(data, report: FitReport, outdir, **kwargs):
    """Write each panel of :func:`plot_points` to ``<outdir>/<panel>.csv``."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {}
    for name, (header, arr) in plot_points(data, report, **kwargs).items():
        path = outdir / f"{name}.csv"
        with path.open("w", encoding="utf-8") as fh:
            fh.write(",".join(header) + "\n")
            for a, b in arr:
                fh.write(f"{float(a)!r},{float(b)!r}\n")
        paths[name] = path
    return paths
