"""The Type I-Type II mixture censoring rule and its Weibull likelihood.

``n`` units go on test. Once the ``m``-th failure is seen the test runs for a
further supplementary time ``S`` and then stops, unless every unit has
already failed:  ``T* = min(X_{n:n}, X_{m:n} + S)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .distributions import WeibullParams
from .exceptions import DataError

__all__ = [
    "Case",
    "CensoringScheme",
    "CensoredSample",
    "Sufficients",
    "apply_scheme",
    "log_likelihood",
    "log_likelihood_sufficients",
]


class Case(str, enum.Enum):
    """Which of the two data layouts the experiment produced."""

    I = "I"  # noqa: E741  every unit failed by X_{m:n} + S
    II = "II"


@dataclass(frozen=True)
class CensoringScheme:
    n: int
    m: int
    S: float

    def __post_init__(self):
        if int(self.n) != self.n or int(self.m) != self.m:
            raise ValueError("n and m must be integers")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "S", float(self.S))
        if not 1 <= self.m <= self.n:
            raise ValueError(f"need 1 <= m <= n, got m={self.m}, n={self.n}")
        if not (self.S >= 0 and np.isfinite(self.S)):
            raise ValueError(f"S must be a finite nonnegative number, got {self.S}")

    def scaled(self, alpha):
        return CensoringScheme(self.n, self.m, self.S * alpha)


@dataclass(frozen=True)
class CensoredSample:
    """Outcome of one T1-T2 censored life test.

    Attributes
    ----------
    failures : tuple of float
        Observed order statistics ``x_{1:n} <= ... <= x_{r:n}``.
    case : Case
    U : float
        ``x_{m:n} + S``. Stored in Case I for reporting only.
    scheme : CensoringScheme
    """

    failures: tuple
    case: Case
    U: float
    scheme: CensoringScheme
    _logx: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        failures = tuple(float(v) for v in self.failures)
        object.__setattr__(self, "failures", failures)
        object.__setattr__(self, "case", Case(self.case))
        object.__setattr__(self, "U", float(self.U))
        n, m = self.scheme.n, self.scheme.m
        r = len(failures)
        if any(v <= 0 for v in failures):
            raise DataError("failure times must be positive")
        if any(b < a for a, b in zip(failures, failures[1:])):
            raise DataError("failures must be nondecreasing")
        if not m <= r <= n:
            raise DataError(f"failure count r={r} outside [{m}, {n}]")
        if self.case is Case.I and r != n:
            raise DataError("Case I requires all n failures")
        if self.case is Case.II:
            if failures and failures[-1] > self.U:
                raise DataError("Case II failures must not exceed U")
            if not self.U > 0:
                raise DataError("U must be positive")
        logx = np.log(np.asarray(failures, dtype=float))
        logx.setflags(write=False)
        object.__setattr__(self, "_logx", logx)

    @property
    def r(self):
        return len(self.failures)

    @property
    def n(self):
        return self.scheme.n

    @property
    def n_censored(self):
        """Units still running at termination (zero in Case I)."""
        return 0 if self.case is Case.I else self.scheme.n - self.r

    @property
    def w(self):
        """Failure count entering the likelihood (n in Case I, r in Case II)."""
        return self.r

    @property
    def duration(self):
        """Termination time ``T*``."""
        return self.failures[-1] if self.case is Case.I else self.U

    def to_record(self):
        return {
            "n": self.scheme.n,
            "m": self.scheme.m,
            "S": self.scheme.S,
            "case": self.case.value,
            "r": self.r,
            "U": self.U,
            "failures": list(self.failures),
        }

    @classmethod
    def from_record(cls, rec):
        sample = cls(
            failures=tuple(rec["failures"]),
            case=Case(rec["case"]),
            U=rec["U"],
            scheme=CensoringScheme(rec["n"], rec["m"], rec["S"]),
        )
        if "r" in rec and int(rec["r"]) != sample.r:
            raise DataError(f"record says r={rec['r']} but lists {sample.r} failures")
        return sample


def apply_scheme(complete, scheme: CensoringScheme) -> CensoredSample:
    """Censor a complete sample of ``n`` lifetimes under ``scheme``.

    Ties with ``U`` count as observed failures, and ``x_{n:n} == U`` is
    Case I.
    """
    x = np.sort(np.asarray(complete, dtype=float).ravel())
    if x.size != scheme.n:
        raise DataError(f"expected {scheme.n} lifetimes, got {x.size}")
    if not np.all(x > 0) or not np.all(np.isfinite(x)):
        raise DataError("lifetimes must be positive and finite")
    U = x[scheme.m - 1] + scheme.S
    if x[-1] <= U:
        return CensoredSample(tuple(x), Case.I, U, scheme)
    r = int(np.searchsorted(x, U, side="right"))
    return CensoredSample(tuple(x[:r]), Case.II, U, scheme)


class Sufficients(NamedTuple):
    w: int
    P: float
    Q: float
    sum_log_x: float


def log_likelihood_sufficients(sample: CensoredSample, gamma) -> Sufficients:
    """``w``, ``P = sum x^g log x``, ``Q = sum x^g`` and ``sum log x``.

    In Case II ``P`` and ``Q`` carry the ``(n - r)`` copies of ``U``.
    """
    g = float(gamma)
    lx = sample._logx
    xg = np.exp(g * lx)
    P = float(np.dot(xg, lx))
    Q = float(xg.sum())
    c = sample.n_censored
    if c:
        lu = np.log(sample.U)
        ug = np.exp(g * lu)
        P += c * ug * lu
        Q += c * ug
    return Sufficients(sample.w, P, Q, float(lx.sum()))


def log_likelihood(sample: CensoredSample, p: WeibullParams) -> float:
    w, _, Q, slx = log_likelihood_sufficients(sample, p.gamma)
    g, d = p.gamma, p.delta
    return float(w * np.log(g) + w * np.log(d) + (g - 1.0) * slx - d * Q)
