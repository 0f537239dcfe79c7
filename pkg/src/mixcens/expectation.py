"""Expected failure count and expected test duration under T1-T2 censoring.

``T* = min(X_{n:n}, X_{m:n} + S)`` and ``K = #{i : X_i <= X_{m:n} + S}``.

Three routes to ``E[T*]`` are offered by :func:`expected_duration`:

``"joint"`` (default)
    integrates the exact survival ``P(X_{n:n} >= x, X_{m:n} >= x - S)``;
``"product"``
    the factorised form ``(1 - F_{n:n}(x)) (1 - F_{m:n}(x - S))``;
``"product-shifted"``
    the factorised form with ``x + S``.

Only the first agrees with simulation in general; the other two are kept for
comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special, stats

from ._quad import integrate_halfline
from .censoring import CensoringScheme
from .distributions import (
    WeibullParams,
    log_binom,
    order_stat_cdf,
    order_stat_pdf,
    weibull_cdf,
    weibull_quantile,
)
from .exceptions import ConvergenceError

__all__ = [
    "DurationReport",
    "ScaleInvarianceReport",
    "expected_failures_given_time",
    "duration_survival",
    "expected_failures",
    "failure_count_distribution",
    "expected_duration",
    "expected_duration_mc",
    "simulate_duration_and_count",
    "check_scale_invariance",
]

MC_BLOCK = 10_000


@dataclass(frozen=True)
class DurationReport:
    expected_failures: float
    expected_duration: float
    method: str  # "quadrature" or "monte_carlo"
    mc_std_error: float | None = None
    failures_std_error: float | None = None
    integrand: str | None = None
    quad_abserr: float | None = None
    replications: int | None = None
    failure_counts: np.ndarray | None = field(default=None, repr=False, compare=False)

    def to_record(self):
        rec = {
            "expected_failures": self.expected_failures,
            "expected_duration": self.expected_duration,
            "method": self.method,
        }
        for key in ("mc_std_error", "failures_std_error", "integrand", "quad_abserr", "replications"):
            val = getattr(self, key)
            if val is not None:
                rec[key] = val
        return rec


def expected_failures_given_time(t, scheme: CensoringScheme, p: WeibullParams):
    """``sum_{r=m}^{n} r C(n,r) F(t)^r (1-F(t))^(n-r)``.

    The binomial mean restricted to ``r >= m``, evaluated at a fixed time.
    """
    n, m = scheme.n, scheme.m
    F = float(weibull_cdf(t, p))
    r = np.arange(m, n + 1)
    return float(np.sum(r * stats.binom.pmf(r, n, F)))


def duration_survival(x, scheme: CensoringScheme, p: WeibullParams):
    """``P(T* >= x)`` computed from the joint law of ``(X_{m:n}, X_{n:n})``."""
    n, m, S = scheme.n, scheme.m, scheme.S
    x = float(x)
    if x <= 0:
        return 1.0
    Fx = float(weibull_cdf(x, p))
    if x <= S:
        return 1.0 - Fx**n
    y = x - S
    Fy = float(weibull_cdf(y, p))
    # P(X_{m:n} >= y) minus P(fewer than m below y and all n below x)
    tail = 1.0 - float(special.betainc(m, n - m + 1, Fy))
    gap = Fx - Fy
    if gap <= 0.0:
        return max(tail, 0.0)
    k = np.arange(m)
    with np.errstate(divide="ignore"):
        logs = log_binom(n, k) + k * np.log(Fy) + (n - k) * np.log(gap)
    if Fy == 0.0:
        logs = np.where(k == 0, log_binom(n, 0) + n * np.log(gap), -np.inf)
    both = float(np.exp(special.logsumexp(logs)))
    return min(max(tail - both, 0.0), 1.0)


def _product_survival(x, scheme, p, literal):
    n, m, S = scheme.n, scheme.m, scheme.S
    first = 1.0 - float(order_stat_cdf(x, n, n, p))
    shifted = x + S if literal else x - S
    second = 1.0 if shifted <= 0 else 1.0 - float(order_stat_cdf(shifted, m, n, p))
    return first * second


def _shift_weight(y, scheme, p):
    """``P(X <= y + S | X > y)`` for one of the units surviving past ``y``."""
    Fy = float(weibull_cdf(y, p))
    Fys = float(weibull_cdf(y + scheme.S, p))
    sf = 1.0 - Fy
    if sf <= 0.0:
        return 1.0
    return min((Fys - Fy) / sf, 1.0)


def expected_failures(scheme: CensoringScheme, p: WeibullParams, tol=1e-10):
    """Unconditional ``E[K]`` by quadrature over the law of ``X_{m:n}``.

    Given ``X_{m:n} = y`` the other ``n - m`` units are i.i.d. beyond ``y``
    and each fails by ``y + S`` with probability ``q(y)``, so
    ``E[K] = m + (n - m) E[q(X_{m:n})]``.
    """
    n, m = scheme.n, scheme.m
    if m == n or scheme.S == 0:
        return float(m)
    q_mean, _ = integrate_halfline(
        lambda y: order_stat_pdf(y, m, n, p) * _shift_weight(y, scheme, p),
        p.scale, [weibull_quantile(m / (n + 1.0), p)], epsabs=tol, epsrel=tol,
    )
    return float(m + (n - m) * q_mean)


def failure_count_distribution(scheme: CensoringScheme, p: WeibullParams, tol=1e-11):
    """Exact ``P(K = r)`` for ``r = m, ..., n`` (array of length ``n - m + 1``)."""
    n, m = scheme.n, scheme.m
    if m == n:
        return np.array([1.0])
    if scheme.S == 0:
        out = np.zeros(n - m + 1)
        out[0] = 1.0
        return out
    j = np.arange(n - m + 1)
    mode = [weibull_quantile(m / (n + 1.0), p)]
    probs = []
    for jj in j:
        def integrand(y, jj=jj):
            q = _shift_weight(y, scheme, p)
            return order_stat_pdf(y, m, n, p) * stats.binom.pmf(jj, n - m, q)
        probs.append(integrate_halfline(integrand, p.scale, mode, epsabs=tol, epsrel=1e-9)[0])
    return np.asarray(probs)


def expected_duration(scheme: CensoringScheme, p: WeibullParams, integrand="joint", tol=1e-10):
    """``E[T*]`` by quadrature of the survival function of ``T*``.

    Raises
    ------
    ConvergenceError
        If QUADPACK fails; ``partial`` carries the unconverged value.
    """
    n, S = scheme.n, scheme.S
    if integrand == "joint":
        surv = lambda x: duration_survival(x, scheme, p)  # noqa: E731
    elif integrand in ("product", "product-shifted"):
        literal = integrand == "product-shifted"
        surv = lambda x: _product_survival(x, scheme, p, literal)  # noqa: E731
    else:
        raise ValueError(f"unknown integrand {integrand!r}")

    points = [weibull_quantile(k / (n + 1.0), p) for k in (scheme.m, n)]
    total = err = 0.0
    try:
        if S > 0:
            # survival has a kink at x = S
            head, head_err = integrate.quad(surv, 0.0, S, epsabs=tol, epsrel=tol, limit=200)
            tail, tail_err = integrate_halfline(
                lambda y: surv(y + S), p.scale, [q - S for q in points if q > S],
                epsabs=tol, epsrel=tol,
            )
            total, err = head + tail, head_err + tail_err
        else:
            total, err = integrate_halfline(surv, p.scale, points, epsabs=tol, epsrel=tol)
    except ConvergenceError as exc:
        raise ConvergenceError(f"E[T*] quadrature failed: {exc}", partial=total + (exc.partial or 0.0)) from exc

    return DurationReport(
        expected_failures=expected_failures(scheme, p),
        expected_duration=float(total),
        method="quadrature",
        integrand=integrand,
        quad_abserr=float(err),
    )


def _block_rng(seed, block):
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(block)]))


def simulate_duration_and_count(scheme: CensoringScheme, p: WeibullParams, replications, seed):
    """Simulated ``T*`` and ``K`` for each replication.

    Replications are drawn in fixed blocks of ``MC_BLOCK``, block ``b``
    seeded from ``(seed, b)``, so results do not depend on how blocks are
    distributed over workers.
    """
    n, m, S = scheme.n, scheme.m, scheme.S
    replications = int(replications)
    if replications < 1:
        raise ValueError("replications must be >= 1")
    durations = np.empty(replications)
    counts = np.empty(replications, dtype=np.int64)
    for b, start in enumerate(range(0, replications, MC_BLOCK)):
        size = min(MC_BLOCK, replications - start)
        u = _block_rng(seed, b).random((size, n))
        u = np.maximum(u, np.finfo(float).tiny)
        x = np.sort((-np.log1p(-u) / p.delta) ** (1.0 / p.gamma), axis=1)
        U = x[:, m - 1] + S
        durations[start:start + size] = np.minimum(x[:, -1], U)
        counts[start:start + size] = (x <= U[:, None]).sum(axis=1)
    return durations, counts


def expected_duration_mc(scheme: CensoringScheme, p: WeibullParams, replications=100_000, seed=0):
    """Monte Carlo ``E[T*]`` and ``E[K]`` with standard errors."""
    durations, counts = simulate_duration_and_count(scheme, p, replications, seed)
    R = durations.size
    sd_t = float(durations.std(ddof=1)) if R > 1 else 0.0
    sd_k = float(counts.std(ddof=1)) if R > 1 else 0.0
    hist = np.bincount(counts - scheme.m, minlength=scheme.n - scheme.m + 1)
    return DurationReport(
        expected_failures=float(counts.mean()),
        expected_duration=float(durations.mean()),
        method="monte_carlo",
        mc_std_error=sd_t / np.sqrt(R),
        failures_std_error=sd_k / np.sqrt(R),
        replications=R,
        failure_counts=hist,
    )


@dataclass(frozen=True)
class ScaleInvarianceReport:
    alpha: float
    duration: float
    scaled_duration: float
    ratio: float
    ratio_error: float
    count_probs: np.ndarray = field(repr=False)
    scaled_count_probs: np.ndarray = field(repr=False)
    max_prob_diff: float
    mc_mean_count: float
    mc_scaled_mean_count: float
    mc_count_diff_se: float
    chi2_pvalue: float
    passed: bool


def check_scale_invariance(scheme: CensoringScheme, p: WeibullParams, alpha,
                           replications=200_000, seed=0, ratio_tol=1e-6, prob_tol=1e-8):
    """Compare the scheme against the same test run on an ``alpha``-scaled clock.

    Lifetimes ``alpha X`` are Weibull with ``delta / alpha**gamma`` and the
    supplementary time becomes ``alpha S``. Checks that ``E[T*]`` scales by
    ``alpha`` and that the law of ``K`` is unchanged (exact probabilities and
    a paired-seed chi-square homogeneity test).
    """
    alpha = float(alpha)
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    scaled_scheme = scheme.scaled(alpha)
    scaled_p = p.rescaled(alpha)

    base = expected_duration(scheme, p).expected_duration
    scaled = expected_duration(scaled_scheme, scaled_p).expected_duration
    ratio = scaled / base

    probs = failure_count_distribution(scheme, p)
    scaled_probs = failure_count_distribution(scaled_scheme, scaled_p)
    max_diff = float(np.max(np.abs(probs - scaled_probs)))

    mc = expected_duration_mc(scheme, p, replications, seed)
    mc_scaled = expected_duration_mc(scaled_scheme, scaled_p, replications, seed)
    table = np.vstack([mc.failure_counts, mc_scaled.failure_counts])
    table = table[:, table.sum(axis=0) > 0]
    if table.shape[1] < 2:
        pvalue = 1.0
    else:
        pvalue = float(stats.chi2_contingency(table, correction=False).pvalue)
    se = np.hypot(mc.failures_std_error, mc_scaled.failures_std_error)
    diff_se = abs(mc.expected_failures - mc_scaled.expected_failures) / se if se > 0 else 0.0

    passed = (
        abs(ratio - alpha) < ratio_tol
        and max_diff < prob_tol
        and pvalue > 1e-3
        and diff_se < 3.0
    )
    return ScaleInvarianceReport(
        alpha=alpha,
        duration=base,
        scaled_duration=scaled,
        ratio=ratio,
        ratio_error=abs(ratio - alpha),
        count_probs=probs,
        scaled_count_probs=scaled_probs,
        max_prob_diff=max_diff,
        mc_mean_count=mc.expected_failures,
        mc_scaled_mean_count=mc_scaled.expected_failures,
        mc_count_diff_se=float(diff_se),
        chi2_pvalue=pvalue,
        passed=bool(passed),
    )
