"""Monte Carlo study of the MLE and Bayes estimators under T1-T2 censoring.

Every replication draws its complete sample from a seed derived from
``(base_seed, n, replication)``. Schemes sharing ``n`` therefore see the
same lifetimes (common random numbers), which makes cross-scheme
comparisons much less noisy and makes ``m = n`` rows independent of ``S``.
Aggregates are formed with :func:`math.fsum`, so the output does not depend
on the order in which replications finish or on the number of workers.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .bayes import McmcConfig, PriorSpec, bayes_estimates, bias_and_risk, run_mh_gibbs
from .censoring import CensoringScheme, apply_scheme
from .distributions import WeibullParams, sample_weibull
from .exceptions import DataError
from .mle import MleConfig, fit_mle

__all__ = [
    "STANDARD_SCHEMES",
    "default_schemes",
    "StudyDesign",
    "StudyResult",
    "replication_seed",
    "interval_summary",
    "error_summary",
    "run_mle_study",
    "run_bayes_study",
    "coverage_table",
]

# (n, m) pairs of the standard study grid, run at S = 0.1 and 0.2
STANDARD_SCHEMES = (
    (100, 100), (100, 90), (100, 85), (100, 80),
    (60, 60), (60, 55), (60, 50), (60, 45),
    (30, 30), (30, 25), (30, 20), (30, 15),
    (15, 15), (15, 12), (15, 10), (15, 7),
)


def default_schemes(supplementary=(0.1, 0.2)):
    return [CensoringScheme(n, m, S) for S in supplementary for n, m in STANDARD_SCHEMES]


@dataclass(frozen=True)
class StudyDesign:
    truth: WeibullParams
    schemes: tuple
    replications: int = 1000
    base_seed: int = 2024
    mle_config: MleConfig = field(default_factory=MleConfig)
    prior: PriorSpec = field(default_factory=lambda: PriorSpec(1.0, 1.0, 1.0, 1.0))
    mcmc: McmcConfig = field(default_factory=lambda: McmcConfig(N=3000, M=500))
    loss_params: tuple = (-1.0, 1.0)
    alpha_level: float = 0.05
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "schemes", tuple(self.schemes))
        object.__setattr__(self, "loss_params", tuple(float(d) for d in self.loss_params))
        if int(self.replications) != self.replications or self.replications < 1:
            raise ValueError("replications must be a positive integer")
        if not self.schemes:
            raise ValueError("at least one scheme is required")
        if any(d == 0 for d in self.loss_params):
            raise ValueError("LINEX parameters must be nonzero")
        if not 0 < self.alpha_level < 1:
            raise ValueError("alpha_level must lie in (0, 1)")
        if int(self.workers) < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class StudyResult:
    kind: str
    truth: WeibullParams
    rows: list
    replications: int
    base_seed: int

    @property
    def columns(self):
        return list(self.rows[0]) if self.rows else []

    def row(self, n, m, S):
        for row in self.rows:
            if row["n"] == n and row["m"] == m and math.isclose(row["S"], S):
                return row
        raise KeyError((n, m, S))

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=self.columns, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({k: (repr(float(v)) if isinstance(v, float) else v) for k, v in row.items()})
        return buf.getvalue()

    def to_json(self):
        doc = {
            "kind": self.kind,
            "truth": {"gamma": self.truth.gamma, "delta": self.truth.delta},
            "replications": self.replications,
            "base_seed": self.base_seed,
            "rows": self.rows,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def replication_seed(base_seed, n, rep, stream=0):
    """Seed for replication ``rep`` of sample size ``n``.

    ``stream`` separates independent uses (0: lifetimes, 1: MCMC chain).
    """
    return np.random.SeedSequence([int(base_seed), int(n), int(rep), int(stream)])


def _scheme_label(s):
    return f"n={s.n}, m={s.m}, S={s.S:g}"


def error_summary(estimates, truth):
    """Bias, MSE, variance and Monte Carlo standard errors of estimates.

    ``var`` is defined as ``mse - bias**2`` so the decomposition is exact.
    """
    est = [float(v) for v in estimates]
    R = len(est)
    if R == 0:
        nan = float("nan")
        return {"bias": nan, "mse": nan, "var": nan, "mcse_bias": nan, "mcse_mse": nan}
    err = [e - truth for e in est]
    sq = [e * e for e in err]
    bias = math.fsum(err) / R
    mse = math.fsum(sq) / R
    var = mse - bias * bias
    if R > 1:
        sd_err = math.sqrt(max(math.fsum((e - bias) ** 2 for e in err) / (R - 1), 0.0))
        sd_sq = math.sqrt(max(math.fsum((s - mse) ** 2 for s in sq) / (R - 1), 0.0))
    else:
        sd_err = sd_sq = 0.0
    return {"bias": bias, "mse": mse, "var": var,
            "mcse_bias": sd_err / math.sqrt(R), "mcse_mse": sd_sq / math.sqrt(R)}


def interval_summary(lowers, uppers, truth):
    """Mean length and empirical coverage of a set of intervals."""
    lo = np.asarray(lowers, dtype=float)
    hi = np.asarray(uppers, dtype=float)
    if lo.size == 0:
        return float("nan"), float("nan")
    with np.errstate(invalid="ignore"):
        length = hi - lo
    finite = np.isfinite(length)
    cl = math.fsum(length[finite].tolist()) / int(finite.sum()) if finite.any() else float("inf")
    cp = float(np.count_nonzero((lo <= truth) & (truth <= hi))) / lo.size
    return cl, cp


# -- per-replication work ----------------------------------------------------

def _complete_sample(design, n, rep):
    return sample_weibull(n, design.truth, replication_seed(design.base_seed, n, rep, 0))


def _mle_replication(design, scheme, rep):
    sample = apply_scheme(_complete_sample(design, scheme.n, rep), scheme)
    try:
        fit = fit_mle(sample, design.mle_config)
    except (DataError, ValueError, np.linalg.LinAlgError, FloatingPointError):
        return {"ok": False, "r": sample.r}
    if not fit.converged or not np.all(np.isfinite(fit.observed_info)):
        return {"ok": False, "r": sample.r}
    return {
        "ok": True, "r": sample.r,
        "gamma": fit.params.gamma, "delta": fit.params.delta,
        "aci_gamma": fit.aci_gamma, "aci_delta": fit.aci_delta,
    }


def _bayes_replication(design, scheme, rep):
    sample = apply_scheme(_complete_sample(design, scheme.n, rep), scheme)
    cfg = McmcConfig(
        N=design.mcmc.N, M=design.mcmc.M, proposal_sd=design.mcmc.proposal_sd,
        seed=replication_seed(design.base_seed, scheme.n, rep, 1), init=design.mcmc.init,
    )
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            post = run_mh_gibbs(sample, design.prior, cfg)
    except DataError:
        return {"ok": False, "r": sample.r}
    est = bayes_estimates(post, design.loss_params, design.alpha_level)
    return {
        "ok": True, "r": sample.r,
        "se": (est.se_gamma, est.se_delta),
        "linex": {d: est.linex[d] for d in design.loss_params},
        "hpd_gamma": est.hpd_gamma, "hpd_delta": est.hpd_delta,
        "acceptance": post.acceptance_rate, "flagged": post.warning,
    }


def _run_chunk(args):
    kind, design, scheme, reps = args
    fn = _mle_replication if kind == "mle" else _bayes_replication
    return [(rep, fn(design, scheme, rep)) for rep in reps]


def _collect(kind, design):
    """Run every (scheme, replication) task; results keyed by scheme index."""
    R = design.replications
    tasks = []
    chunk = max(1, math.ceil(R / (4 * design.workers)))
    for idx, scheme in enumerate(design.schemes):
        for start in range(0, R, chunk):
            tasks.append((idx, (kind, design, scheme, range(start, min(R, start + chunk)))))
    out = {idx: {} for idx in range(len(design.schemes))}
    if design.workers == 1:
        for idx, args in tasks:
            out[idx].update(_run_chunk(args))
    else:
        with ProcessPoolExecutor(max_workers=design.workers) as pool:
            for (idx, _), res in zip(tasks, pool.map(_run_chunk, [a for _, a in tasks])):
                out[idx].update(res)
    return {idx: [res[rep] for rep in sorted(res)] for idx, res in out.items()}


# -- studies -------------------------------------------------------------------

def run_mle_study(design: StudyDesign) -> StudyResult:
    """Bias, MSE, ACI length and ACI coverage of the MLE for every scheme."""
    g0, d0 = design.truth.gamma, design.truth.delta
    rows = []
    for idx, reps in _collect("mle", design).items():
        scheme = design.schemes[idx]
        ok = [r for r in reps if r["ok"]]
        eg = error_summary([r["gamma"] for r in ok], g0)
        ed = error_summary([r["delta"] for r in ok], d0)
        cl_g, cp_g = interval_summary([r["aci_gamma"][0] for r in ok], [r["aci_gamma"][1] for r in ok], g0)
        cl_d, cp_d = interval_summary([r["aci_delta"][0] for r in ok], [r["aci_delta"][1] for r in ok], d0)
        rows.append({
            "scheme": _scheme_label(scheme), "n": scheme.n, "m": scheme.m, "S": scheme.S,
            "bias_gamma": eg["bias"], "bias_delta": ed["bias"],
            "mse_gamma": eg["mse"], "mse_delta": ed["mse"],
            "var_gamma": eg["var"], "var_delta": ed["var"],
            "mcse_bias_gamma": eg["mcse_bias"], "mcse_bias_delta": ed["mcse_bias"],
            "mcse_mse_gamma": eg["mcse_mse"], "mcse_mse_delta": ed["mcse_mse"],
            "aci_cl_gamma": cl_g, "aci_cl_delta": cl_d,
            "aci_cp_gamma": cp_g, "aci_cp_delta": cp_d,
            "mean_r": math.fsum(r["r"] for r in reps) / len(reps),
            "reps_used": len(ok), "reps_failed": len(reps) - len(ok),
        })
    return StudyResult("mle", design.truth, rows, design.replications, design.base_seed)


def _dkey(d):
    return f"{d:+g}"


def run_bayes_study(design: StudyDesign) -> StudyResult:
    """Bias and risk of the SE and LINEX Bayes estimates, plus HPD length/coverage."""
    truth = {"gamma": design.truth.gamma, "delta": design.truth.delta}
    rows = []
    for idx, reps in _collect("bayes", design).items():
        scheme = design.schemes[idx]
        ok = [r for r in reps if r["ok"]]
        row = {"scheme": _scheme_label(scheme), "n": scheme.n, "m": scheme.m, "S": scheme.S}
        for j, name in enumerate(("gamma", "delta")):
            bias, risk = bias_and_risk([r["se"][j] for r in ok], truth[name], "SE")
            row[f"se_bias_{name}"], row[f"se_risk_{name}"] = bias, risk
        for d in design.loss_params:
            for j, name in enumerate(("gamma", "delta")):
                bias, risk = bias_and_risk([r["linex"][d][j] for r in ok], truth[name], d)
                row[f"linex{_dkey(d)}_bias_{name}"] = bias
                row[f"linex{_dkey(d)}_risk_{name}"] = risk
        for name in ("gamma", "delta"):
            cl, cp = interval_summary([r[f"hpd_{name}"][0] for r in ok], [r[f"hpd_{name}"][1] for r in ok], truth[name])
            row[f"hpd_cl_{name}"], row[f"hpd_cp_{name}"] = cl, cp
        row["mean_acceptance"] = math.fsum(r["acceptance"] for r in ok) / len(ok) if ok else float("nan")
        row["chains_flagged"] = sum(bool(r["flagged"]) for r in ok)
        row["mean_r"] = math.fsum(r["r"] for r in reps) / len(reps)
        row["reps_used"] = len(ok)
        row["reps_failed"] = len(reps) - len(ok)
        rows.append(row)
    return StudyResult("bayes", design.truth, rows, design.replications, design.base_seed)


def coverage_table(design: StudyDesign, mle: StudyResult | None = None,
                   bayes: StudyResult | None = None) -> StudyResult:
    """CL and CP of the ACI and HPD intervals side by side.

    Pass already-computed study results to avoid running them again.
    """
    mle = mle or run_mle_study(design)
    bayes = bayes or run_bayes_study(design)
    rows = []
    for a, b in zip(mle.rows, bayes.rows):
        rows.append({
            "scheme": a["scheme"], "n": a["n"], "m": a["m"], "S": a["S"],
            "hpd_cl_gamma": b["hpd_cl_gamma"], "hpd_cl_delta": b["hpd_cl_delta"],
            "hpd_cp_gamma": b["hpd_cp_gamma"], "hpd_cp_delta": b["hpd_cp_delta"],
            "aci_cl_gamma": a["aci_cl_gamma"], "aci_cl_delta": a["aci_cl_delta"],
            "aci_cp_gamma": a["aci_cp_gamma"], "aci_cp_delta": a["aci_cp_delta"],
        })
    return StudyResult("coverage", design.truth, rows, design.replications, design.base_seed)


def design_record(design: StudyDesign):
    """Plain-dict view of a design (for provenance hashing)."""
    rec = asdict(design)
    rec["schemes"] = [[s.n, s.m, s.S] for s in design.schemes]
    rec.pop("workers")
    return rec

