"""Command-line front end.

Every command writes a machine-readable JSON report (sorted keys, no
timestamps) to ``--output`` or standard output, plus a short human-readable
summary on standard error. Exit codes: 0 success, 1 usage or configuration
error, 2 data error, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bayes import McmcConfig, PriorSpec, bayes_estimates, run_mh_gibbs
from .censoring import CensoredSample, CensoringScheme, apply_scheme
from .data import BUILTIN, load_builtin
from .distributions import WeibullParams
from .exceptions import ConvergenceError, DataError
from .expectation import check_scale_invariance, expected_duration, expected_duration_mc
from .gof import export_plot_data, goodness_of_fit_table
from .mle import MleConfig, fit_mle
from .simulation import (
    STANDARD_SCHEMES,
    StudyDesign,
    coverage_table,
    design_record,
    run_bayes_study,
    run_mle_study,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
SEED_ENV = "MIXCENS_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- input ---------------------------------------------------------------------

def _parse_float(text, where):
    try:
        val = float(text)
    except ValueError:
        raise DataError(f"{where}: cannot parse {text!r} as a number") from None
    if not math.isfinite(val):
        raise DataError(f"{where}: non-finite value {text!r}")
    return val


def read_values(source, column=None):
    """Read a one-column file, or one column of a comma-delimited file.

    ``source`` may be ``builtin:<name>``. A non-numeric first row is taken
    as a header. ``column`` is a header name or a zero-based index.
    """
    if source.startswith("builtin:"):
        try:
            return np.array(load_builtin(source.split(":", 1)[1]), dtype=float)
        except KeyError:
            raise DataError(f"unknown built-in dataset {source!r}; available: {sorted(BUILTIN)}") from None
    path = Path(source)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {source}: {exc.strerror}") from None
    rows = [(i, row) for i, row in enumerate(csv.reader(text.splitlines()), start=1)
            if row and any(cell.strip() for cell in row)]
    if not rows:
        raise DataError(f"{source}: no data")
    header = None
    first = [c.strip() for c in rows[0][1]]
    try:
        [float(c) for c in first]
    except ValueError:
        header, rows = first, rows[1:]
    if column is None:
        idx = 0
        if rows and len(rows[0][1]) > 1:
            raise UsageError(f"{source} has several columns; select one with --column")
    elif header is not None and column in header:
        idx = header.index(column)
    else:
        try:
            idx = int(column)
        except ValueError:
            raise UsageError(f"column {column!r} not found in {source}") from None
    values = []
    for lineno, row in rows:
        if idx >= len(row):
            raise DataError(f"{source}, line {lineno}: missing column {idx}")
        values.append(_parse_float(row[idx].strip(), f"{source}, line {lineno}"))
    if not values:
        raise DataError(f"{source}: no data rows")
    return np.array(values, dtype=float)


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={env!r} is not an integer") from None


def _config_hash(config):
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _dumps(doc):
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _emit(args, doc):
    text = _dumps(doc)
    if getattr(args, "output", None):
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _note(msg):
    print(msg, file=sys.stderr)


def _provenance(command, config, seed=None):
    prov = {"tool": "mixcens", "version": __version__, "command": command,
            "config_hash": _config_hash(config)}
    if seed is not None:
        prov["seed"] = seed
    return prov


# -- sample assembly -------------------------------------------------------------

def _scheme_from(args, n):
    if args.m is None and args.s is None:
        return CensoringScheme(n, n, 0.0)
    if args.m is None or args.s is None:
        raise UsageError("--m and --s must be given together")
    return CensoringScheme(n, args.m, args.s)


def _load_sample(args):
    if getattr(args, "censored", None):
        if args.input or args.m is not None or args.s is not None:
            raise UsageError("--censored cannot be combined with --input, --m or --s")
        try:
            rec = json.loads(Path(args.censored).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read censored sample {args.censored}: {exc}") from None
        rec = rec.get("sample", rec)
        try:
            return CensoredSample.from_record(rec)
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"invalid censored-sample record: {exc}") from None
    if not args.input:
        raise UsageError("one of --input or --censored is required")
    x = read_values(args.input, args.column)
    try:
        return apply_scheme(x, _scheme_from(args, x.size))
    except ValueError as exc:
        raise DataError(str(exc)) from None


def _sample_summary(sample):
    rec = sample.to_record()
    rec.pop("failures")
    return rec


# -- commands ------------------------------------------------------------------

def cmd_censor(args):
    if args.m is None or args.s is None:
        raise UsageError("censor needs --m and --s")
    sample = _load_sample(args)
    config = {"input": args.input, "column": args.column, "m": args.m, "s": args.s}
    _emit(args, {"sample": sample.to_record(), "provenance": _provenance("censor", config)})
    _note(f"r={sample.r} case={sample.case.value} U={sample.U:.6g}")
    return EXIT_OK


def _check_alpha(alpha):
    if not 0 < alpha < 1:
        raise UsageError(f"--alpha must lie in (0, 1), got {alpha}")


def _mle_config(args):
    _check_alpha(args.alpha)
    return MleConfig(gamma_init=args.gamma_init, tol=args.tol, max_iter=args.max_iter,
                     alpha_level=args.alpha, clip_lower=args.clip)


def cmd_fit(args):
    sample = _load_sample(args)
    cfg = _mle_config(args)
    fit = fit_mle(sample, cfg)
    config = {"sample": sample.to_record(), "mle": cfg.__dict__}
    doc = {
        "method": "MLE",
        "estimates": {"gamma": fit.params.gamma, "delta": fit.params.delta},
        "intervals": {"kind": "ACI", "level": 1.0 - cfg.alpha_level,
                      "gamma": list(fit.aci_gamma), "delta": list(fit.aci_delta)},
        "loglik": fit.loglik,
        "iterations": fit.iterations,
        "converged": fit.converged,
        "damped": fit.damped,
        "sample": _sample_summary(sample),
        "provenance": _provenance("fit", config),
    }
    _emit(args, doc)
    if not fit.converged:
        _note(f"fixed-point iteration did not converge in {cfg.max_iter} steps")
        return EXIT_NUMERIC
    _note(f"gamma={fit.params.gamma:.4f} delta={fit.params.delta:.4f} "
          f"ACI gamma=({fit.aci_gamma[0]:.4f}, {fit.aci_gamma[1]:.4f}) "
          f"delta=({fit.aci_delta[0]:.4f}, {fit.aci_delta[1]:.4f})")
    return EXIT_OK


def cmd_bayes(args):
    for d in args.d:
        if d == 0:
            raise UsageError("--d 0 is not a LINEX loss; the squared-error (SE) estimate is always reported")
    _check_alpha(args.alpha)
    seed = _seed(args)
    try:
        prior = PriorSpec(*args.prior)
        mcmc = McmcConfig(N=args.N, M=args.M, proposal_sd=args.proposal_sd, seed=seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    sample = _load_sample(args)
    post = run_mh_gibbs(sample, prior, mcmc)
    est = bayes_estimates(post, args.d, args.alpha)
    config = {"sample": sample.to_record(), "prior": prior.__dict__,
              "mcmc": {"N": mcmc.N, "M": mcmc.M, "proposal_sd": mcmc.proposal_sd},
              "d": list(args.d), "alpha": args.alpha}
    doc = {
        "method": "Bayes",
        "estimates": {
            "SE": {"gamma": est.se_gamma, "delta": est.se_delta},
            **{f"LINEX(d={d:g})": {"gamma": g, "delta": dl} for d, (g, dl) in est.linex.items()},
        },
        "intervals": {"kind": "HPD", "level": 1.0 - args.alpha,
                      "gamma": list(est.hpd_gamma), "delta": list(est.hpd_delta)},
        "chain": {"kept": len(post), "acceptance_rate": post.acceptance_rate,
                  "proposal_sd": post.proposal_sd, "init": list(post.init),
                  "acceptance_warning": post.warning},
        "sample": _sample_summary(sample),
        "provenance": _provenance("bayes", config, seed),
    }
    if args.save_chains:
        Path(args.save_chains).write_text(post.to_text(), encoding="utf-8")
    _emit(args, doc)
    _note(f"SE gamma={est.se_gamma:.4f} delta={est.se_delta:.4f} "
          f"HPD gamma=({est.hpd_gamma[0]:.4f}, {est.hpd_gamma[1]:.4f}) acceptance={post.acceptance_rate:.3f}")
    return EXIT_OK


def cmd_expect(args):
    try:
        scheme = CensoringScheme(args.n, args.m, args.s)
        params = WeibullParams(args.gamma, args.delta)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    seed = _seed(args) if args.method == "mc" else None
    integrand = "product-shifted" if args.paper_literal else args.integrand
    if args.method == "quad":
        report = expected_duration(scheme, params, integrand=integrand)
    else:
        report = expected_duration_mc(scheme, params, args.replications, seed)
    config = {"n": args.n, "m": args.m, "s": args.s, "gamma": args.gamma, "delta": args.delta,
              "method": args.method, "integrand": integrand, "replications": args.replications}
    doc = {"expectation": report.to_record(), "provenance": _provenance("expect", config, seed)}
    if args.alpha_scale is not None:
        inv = check_scale_invariance(scheme, params, args.alpha_scale, seed=_seed(args))
        doc["scale_check"] = {
            "alpha": inv.alpha, "ratio": inv.ratio, "ratio_error": inv.ratio_error,
            "duration": inv.duration, "scaled_duration": inv.scaled_duration,
            "max_count_prob_diff": inv.max_prob_diff, "chi2_pvalue": inv.chi2_pvalue,
            "passed": inv.passed,
        }
    _emit(args, doc)
    msg = f"E[T*]={report.expected_duration:.6f} E[K]={report.expected_failures:.6f}"
    if report.mc_std_error is not None:
        msg += f" (MC s.e. {report.mc_std_error:.2g})"
    if args.alpha_scale is not None:
        msg += f" ratio={doc['scale_check']['ratio']:.10g}"
    _note(msg)
    return EXIT_OK


def cmd_gof(args):
    x = read_values(args.input, args.column)
    reports = goodness_of_fit_table(x)
    if args.plot_dir:
        export_plot_data(x, reports[0], args.plot_dir)
    config = {"input": args.input, "column": args.column}
    _emit(args, {"models": [r.to_record() for r in reports], "n": int(x.size),
                 "provenance": _provenance("gof", config)})
    _note(f"{'model':<15}{'KS':>8}{'p':>8}{'-2logL':>10}{'AIC':>10}{'AICC':>10}{'BIC':>10}{'HQC':>10}")
    for r in reports:
        _note(f"{r.model:<15}{r.ks_stat:8.4f}{r.p_value:8.4f}{r.nll2:10.4f}{r.aic:10.4f}"
              f"{r.aicc:10.4f}{r.bic:10.4f}{r.hqc:10.4f}")
    return EXIT_OK


SIM_KEYS = {
    "gamma": float, "delta": float, "schemes": list, "grid": str, "replications": int,
    "base_seed": int, "study": str, "alpha_level": float, "loss_params": list,
    "prior_alpha1": float, "prior_beta1": float, "prior_alpha2": float, "prior_beta2": float,
    "mcmc_N": int, "mcmc_M": int, "proposal_sd": float,
    "mle_tol": float, "mle_max_iter": int, "gamma_init": float, "clip": bool,
}
SIM_STUDIES = ("mle", "bayes", "coverage", "all")


def load_sim_config(path):
    """Parse and validate a flat JSON study configuration."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise UsageError("config must be a JSON object")
    unknown = sorted(set(raw) - set(SIM_KEYS))
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    for key, typ in SIM_KEYS.items():
        if key in raw and raw[key] is not None:
            val = raw[key]
            ok = isinstance(val, typ) or (typ is float and isinstance(val, int) and not isinstance(val, bool))
            if typ is int and isinstance(val, bool):
                ok = False
            if not ok:
                raise UsageError(f"config key {key!r} must be of type {typ.__name__}")
    for key in ("gamma", "delta", "replications"):
        if key not in raw:
            raise UsageError(f"config key {key!r} is required")
    if ("schemes" in raw) == ("grid" in raw):
        raise UsageError("give exactly one of 'schemes' or 'grid'")
    if raw.get("study", "mle") not in SIM_STUDIES:
        raise UsageError(f"study must be one of {SIM_STUDIES}")
    return raw


def design_from_config(raw, workers=1):
    try:
        if "grid" in raw:
            if raw["grid"] != "standard":
                raise UsageError("the only named grid is 'standard'")
            schemes = [CensoringScheme(n, m, S) for S in (0.1, 0.2) for n, m in STANDARD_SCHEMES]
        else:
            schemes = [CensoringScheme(*s) for s in raw["schemes"]]
        return StudyDesign(
            truth=WeibullParams(raw["gamma"], raw["delta"]),
            schemes=schemes,
            replications=raw["replications"],
            base_seed=raw.get("base_seed", 2024),
            mle_config=MleConfig(gamma_init=raw.get("gamma_init", 1.0), tol=raw.get("mle_tol", 1e-8),
                                 max_iter=raw.get("mle_max_iter", 500),
                                 alpha_level=raw.get("alpha_level", 0.05), clip_lower=raw.get("clip", False)),
            prior=PriorSpec(raw.get("prior_alpha1", 1.0), raw.get("prior_beta1", 1.0),
                            raw.get("prior_alpha2", 1.0), raw.get("prior_beta2", 1.0)),
            mcmc=McmcConfig(N=raw.get("mcmc_N", 3000), M=raw.get("mcmc_M", 500),
                            proposal_sd=raw.get("proposal_sd")),
            loss_params=tuple(raw.get("loss_params", (-1.0, 1.0))),
            alpha_level=raw.get("alpha_level", 0.05),
            workers=workers,
        )
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid study configuration: {exc}") from None


def cmd_simulate(args):
    raw = load_sim_config(args.config)
    design = design_from_config(raw, args.workers)
    study = raw.get("study", "mle")
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    results = {}
    if study in ("mle", "coverage", "all"):
        results["mle"] = run_mle_study(design)
    if study in ("bayes", "coverage", "all"):
        results["bayes"] = run_bayes_study(design)
    if study in ("coverage", "all"):
        results["coverage"] = coverage_table(design, results["mle"], results["bayes"])
        if study == "coverage":
            results = {"coverage": results["coverage"]}
    prov = _provenance("simulate", design_record(design), design.base_seed)
    written = []
    for kind, res in results.items():
        (outdir / f"{kind}.csv").write_text(res.to_csv(), encoding="utf-8")
        doc = json.loads(res.to_json())
        doc["provenance"] = prov
        (outdir / f"{kind}.json").write_text(_dumps(doc), encoding="utf-8")
        written += [f"{kind}.csv", f"{kind}.json"]
        failed = sum(row["reps_failed"] for row in res.rows if "reps_failed" in row)
        if failed:
            _note(f"{kind}: {failed} replications excluded (non-convergent or degenerate)")
    _note(f"wrote {', '.join(written)} to {outdir}")
    return EXIT_OK


# -- parser --------------------------------------------------------------------

def _add_input(p, censored=True):
    p.add_argument("--input", help="data file (one value per line) or builtin:precipitation")
    p.add_argument("--column", help="column name or zero-based index for comma-delimited input")
    if censored:
        p.add_argument("--censored", help="censored-sample record written by 'censor'")
    p.add_argument("--m", type=int, help="guaranteed number of failures")
    p.add_argument("--s", type=float, help="supplementary time after the m-th failure")


def build_parser():
    parser = _Parser(prog="mixcens", description="Weibull inference under Type I-Type II mixture censoring")
    parser.add_argument("--version", action="version", version=f"mixcens {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("censor", help="apply a censoring scheme to complete data")
    _add_input(p, censored=False)
    p.add_argument("--output")
    p.set_defaults(func=cmd_censor)

    p = sub.add_parser("fit", help="maximum likelihood fit with asymptotic intervals")
    _add_input(p)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--clip", action="store_true", help="truncate negative ACI lower bounds at zero")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--gamma-init", type=float, default=1.0)
    p.add_argument("--output")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("bayes", help="posterior sampling, SE/LINEX estimates and HPD intervals")
    _add_input(p)
    p.add_argument("--prior", type=float, nargs=4, default=(0.0, 0.0, 0.0, 0.0),
                   metavar=("A1", "B1", "A2", "B2"), help="gamma hyperparameters (default all zero)")
    p.add_argument("--N", type=int, default=11_000)
    p.add_argument("--M", type=int, default=1_000)
    p.add_argument("--proposal-sd", type=float)
    p.add_argument("--d", type=float, nargs="+", default=[-1.0, 1.0], help="LINEX parameters")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, help=f"default: ${SEED_ENV} or 0")
    p.add_argument("--save-chains", help="write the kept draws as two columns")
    p.add_argument("--output")
    p.set_defaults(func=cmd_bayes)

    p = sub.add_parser("expect", help="expected number of failures and test duration")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--method", choices=("quad", "mc"), default="quad")
    p.add_argument("--integrand", choices=("joint", "product", "product-shifted"), default="joint")
    p.add_argument("--paper-literal", action="store_true",
                   help="use the published product integrand verbatim (x + S shift)")
    p.add_argument("--replications", type=int, default=100_000)
    p.add_argument("--alpha-scale", type=float, help="also check E[T*] scaling under a clock change")
    p.add_argument("--seed", type=int)
    p.add_argument("--output")
    p.set_defaults(func=cmd_expect)

    p = sub.add_parser("gof", help="Weibull, Lindley and inverse Weibull fits of complete data")
    p.add_argument("--input", required=True)
    p.add_argument("--column")
    p.add_argument("--plot-dir", help="write plot point sets for the Weibull fit as CSV")
    p.add_argument("--output")
    p.set_defaults(func=cmd_gof)

    p = sub.add_parser("simulate", help="Monte Carlo study from a flat JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--output-dir", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        _note(f"mixcens {args.command}: {exc}")
        return EXIT_USAGE
    except ConvergenceError as exc:
        _note(f"mixcens {args.command}: numerical failure: {exc}")
        return EXIT_NUMERIC
    except DataError as exc:
        _note(f"mixcens {args.command}: data error: {exc}")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
