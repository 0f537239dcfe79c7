"""Maximum likelihood for censored Weibull data.

The score in ``delta`` vanishes at ``delta = w / Q(gamma)``; substituting
this into the score in ``gamma`` leaves a one-dimensional fixed-point
problem ``gamma = u(gamma)`` with

    u(gamma) = w / (v(gamma) * P(gamma) - sum(log x)),   v(gamma) = w / Q(gamma).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import stats

from ._quad import integrate_halfline
from .censoring import CensoredSample, log_likelihood, log_likelihood_sufficients
from .distributions import WeibullParams, order_stat_pdf, weibull_quantile
from .exceptions import DegenerateDataError

__all__ = [
    "MleConfig",
    "MleResult",
    "FisherInfo",
    "score",
    "profile_delta",
    "profile_update",
    "fit_mle",
    "observed_information",
    "finite_difference_hessian",
    "fisher_information",
]


@dataclass(frozen=True)
class MleConfig:
    gamma_init: float = 1.0
    tol: float = 1e-8
    max_iter: int = 500
    alpha_level: float = 0.05
    clip_lower: bool = False  # truncate negative ACI lower bounds at zero


@dataclass(frozen=True)
class MleResult:
    params: WeibullParams
    iterations: int
    converged: bool
    loglik: float
    observed_info: np.ndarray
    aci_gamma: tuple
    aci_delta: tuple
    alpha_level: float = 0.05
    damped: bool = False

    @property
    def std_errors(self):
        se = _std_errors(self.observed_info)
        return float(se[0]), float(se[1])


class FisherInfo(NamedTuple):
    I11: float
    I12: float
    I22: float
    r_limit: int

    @property
    def matrix(self):
        return np.array([[self.I11, self.I12], [self.I12, self.I22]])


def _std_errors(info):
    """Square roots of the diagonal of ``info^{-1}``; NaN if not invertible.

    Near-degenerate samples (e.g. two almost tied failures) drive the MLE
    to extreme values where the information overflows.
    """
    if not np.all(np.isfinite(info)):
        return np.array([np.nan, np.nan])
    try:
        cov = np.linalg.inv(info)
    except np.linalg.LinAlgError:
        return np.array([np.nan, np.nan])
    with np.errstate(invalid="ignore"):
        return np.sqrt(np.diag(cov))


def score(sample: CensoredSample, p: WeibullParams):
    """Gradient of the log-likelihood, ``(d/dgamma, d/ddelta)``."""
    w, P, Q, slx = log_likelihood_sufficients(sample, p.gamma)
    return w / p.gamma + slx - p.delta * P, w / p.delta - Q


def profile_delta(sample: CensoredSample, gamma):
    """``v(gamma) = w / Q(gamma)``, the conditional MLE of delta."""
    w, _, Q, _ = log_likelihood_sufficients(sample, gamma)
    return w / Q


def profile_update(sample: CensoredSample, gamma):
    """One step of the fixed-point map ``u(gamma)``."""
    w, P, Q, slx = log_likelihood_sufficients(sample, gamma)
    denom = (w / Q) * P - slx
    if not denom > 0:
        raise DegenerateDataError("fixed-point map undefined: P, Q collinear for these data")
    return w / denom


def _check_informative(sample):
    if sample.r < 2:
        raise DegenerateDataError(f"need at least 2 failures, got r={sample.r}")
    if len(set(sample.failures)) < 2:
        raise DegenerateDataError("all observed failure times are equal")


def observed_information(sample: CensoredSample, p: WeibullParams):
    """Negative Hessian of the log-likelihood, from analytic derivatives."""
    g, d = p.gamma, p.delta
    lx = sample._logx
    xg = np.exp(g * lx)
    P = float(np.dot(xg, lx))
    P2 = float(np.dot(xg, lx * lx))
    c = sample.n_censored
    if c:
        lu = np.log(sample.U)
        ug = np.exp(g * lu)
        P += c * ug * lu
        P2 += c * ug * lu * lu
    w = sample.w
    g, d = np.float64(g), np.float64(d)
    with np.errstate(over="ignore", invalid="ignore"):
        return np.array([[w / g**2 + d * P2, P], [P, w / d**2]])


def finite_difference_hessian(sample: CensoredSample, p: WeibullParams, rel_step=1e-4):
    """Central-difference Hessian of the log-likelihood (cross-check only)."""
    x0 = np.array([p.gamma, p.delta])
    h = rel_step * x0

    def f(v):
        return log_likelihood(sample, WeibullParams(*v))

    H = np.empty((2, 2))
    for a in range(2):
        ea = np.zeros(2)
        ea[a] = h[a]
        H[a, a] = (f(x0 + ea) - 2 * f(x0) + f(x0 - ea)) / h[a] ** 2
        for b in range(a + 1, 2):
            eb = np.zeros(2)
            eb[b] = h[b]
            H[a, b] = H[b, a] = (
                f(x0 + ea + eb) - f(x0 + ea - eb) - f(x0 - ea + eb) + f(x0 - ea - eb)
            ) / (4 * h[a] * h[b])
    return H


def _polish(sample, gamma, steps=4):
    """A few secant steps on ``u(gamma) - gamma``, each kept only if it helps.

    The profile score in gamma is ``w (u - gamma) / (gamma u)``, so a
    residual at the iteration tolerance can still leave a visible score.
    """
    h = lambda g: profile_update(sample, g) - g  # noqa: E731
    g0, h0 = gamma, h(gamma)
    g1 = gamma * (1.0 + 1e-7)
    h1 = h(g1)
    for _ in range(steps):
        if h1 == h0:
            break
        g2 = g1 - h1 * (g1 - g0) / (h1 - h0)
        if not g2 > 0:
            break
        g0, h0, g1, h1 = g1, h1, g2, h(g2)
    best = min(((abs(h(gamma)), gamma), (abs(h1), g1), (abs(h0), g0)))
    return best[1]


def fit_mle(sample: CensoredSample, config: MleConfig | None = None) -> MleResult:
    """Fit (gamma, delta) by iterating ``gamma <- u(gamma)``.

    Plain iteration is used until the increments alternate in sign five
    times in a row; from then on the averaged map ``(gamma + u(gamma)) / 2``
    takes over. Convergence means ``|u(gamma) - gamma| < tol`` at the
    returned gamma. ``converged`` is False if ``max_iter`` is exhausted, in
    which case the last iterate is still returned.
    """
    cfg = config or MleConfig()
    _check_informative(sample)

    gamma = float(cfg.gamma_init)
    damped = False
    flips = 0
    last_step = 0.0
    converged = False
    it = 0
    for it in range(1, cfg.max_iter + 1):
        target = profile_update(sample, gamma)
        if abs(target - gamma) < cfg.tol:
            gamma = target
            if abs(profile_update(sample, gamma) - gamma) < cfg.tol:
                converged = True
                break
            continue
        new = 0.5 * (gamma + target) if damped else target
        step = new - gamma
        gamma = new
        if last_step and np.sign(step) != np.sign(last_step):
            flips += 1
            if flips >= 5 and not damped:
                damped = True
        else:
            flips = 0
        last_step = step

    if converged:
        try:
            gamma = _polish(sample, gamma)
        except DegenerateDataError:
            pass
    params = WeibullParams(gamma, profile_delta(sample, gamma))
    info = observed_information(sample, params)
    z = stats.norm.ppf(1.0 - cfg.alpha_level / 2.0)
    se = _std_errors(info)
    lo_g, hi_g = params.gamma - z * se[0], params.gamma + z * se[0]
    lo_d, hi_d = params.delta - z * se[1], params.delta + z * se[1]
    if cfg.clip_lower:
        lo_g, lo_d = max(lo_g, 0.0), max(lo_d, 0.0)
    return MleResult(
        params=params,
        iterations=it,
        converged=converged,
        loglik=log_likelihood(sample, params),
        observed_info=info,
        aci_gamma=(float(lo_g), float(hi_g)),
        aci_delta=(float(lo_d), float(hi_d)),
        alpha_level=cfg.alpha_level,
        damped=damped,
    )


def fisher_information(n, r_limit, p: WeibullParams, tol=1e-10) -> FisherInfo:
    """Expected information summed over the first ``r_limit`` order statistics.

    Uses ``d/dgamma log h(t) = 1/gamma + log t`` and ``d/ddelta log h(t) =
    1/delta`` against ``sum_{i<=r_limit} f_{i:n}(t)``.
    """
    n, r_limit = int(n), int(r_limit)
    if n < 1 or not 1 <= r_limit <= n:
        raise IndexError(f"r_limit {r_limit} outside 1..{n}")
    g, d = p.gamma, p.delta

    def density(t):
        return sum(order_stat_pdf(t, i, n, p) for i in range(1, r_limit + 1))

    qs = [weibull_quantile(i / (n + 1.0), p) for i in range(1, r_limit + 1)]
    scale = p.scale
    points = sorted(set(qs))

    def integral(fn):
        return integrate_halfline(lambda t: fn(t) * density(t), scale, points, epsabs=tol, epsrel=tol)[0]

    i11 = integral(lambda t: (1.0 / g + np.log(t)) ** 2)
    i12 = integral(lambda t: (1.0 / g + np.log(t))) / d
    i22 = integral(lambda t: 1.0) / d**2
    return FisherInfo(i11, i12, i22, r_limit)
