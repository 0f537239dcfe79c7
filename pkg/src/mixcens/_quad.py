"""Adaptive quadrature over the positive half-line."""

import warnings

import numpy as np
from scipy import integrate

from .exceptions import ConvergenceError

ABS_TOL = 1e-10
REL_TOL = 1e-10


def integrate_halfline(func, scale, points=(), epsabs=ABS_TOL, epsrel=REL_TOL, limit=400):
    """Integrate ``func`` over ``[0, inf)``.

    The half-line is mapped onto ``[0, 1)`` with ``x = scale * t / (1 - t)``
    and the result handed to QUADPACK. ``scale`` should sit near the bulk of
    the integrand's mass; ``points`` are optional break points in x-space
    (kinks, narrow peaks) that are carried through the substitution.

    Returns
    -------
    value, abserr : float, float

    Raises
    ------
    ConvergenceError
        When QUADPACK reports a failure; ``partial`` holds its value.
    """
    scale = float(scale)
    if not scale > 0:
        raise ValueError("scale must be positive")

    def mapped(t):
        if t >= 1.0:
            return 0.0
        one_minus = 1.0 - t
        x = scale * t / one_minus
        val = func(x)
        if val == 0.0:
            return 0.0
        return val * scale / (one_minus * one_minus)

    tpoints = sorted({p / (p + scale) for p in points if 0.0 < p < np.inf})
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, err = integrate.quad(
                mapped, 0.0, 1.0, points=tpoints or None,
                epsabs=epsabs, epsrel=epsrel, limit=limit,
            )
        except integrate.IntegrationWarning as exc:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                value, err = integrate.quad(
                    mapped, 0.0, 1.0, points=tpoints or None,
                    epsabs=epsabs, epsrel=epsrel, limit=limit,
                )
            if err > max(1e3 * epsabs, 1e3 * epsrel * abs(value)):
                raise ConvergenceError(f"quadrature did not converge: {exc}", partial=value) from exc
    return value, err
