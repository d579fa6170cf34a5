"""Phi-divergence generators, conjugates, and divergence from the uniform base.

The ambiguity sets used throughout this package are balls of probability
mass functions around the uniform (empirical) base distribution,

    { p : (1/M) sum_m phi(M * p_m) <= rho },

where ``phi`` is a nonnegative convex generator with ``phi(1) = 0``.  Two
generators are supported:

* ``KL``:   phi(t) = t*ln(t) - t + 1, with the continuous extension
  phi(0) = 1.
* ``CHI2``: phi(t) = (t - 1)**2.

Their convex conjugates ``phi*(s) = max_{t>=0} {s*t - phi(t)}`` are
implemented in closed form (re-derived by 1-D maximization; the test suite
checks them against a numeric maximizer):

* ``KL``:   phi*(s) = exp(s) - 1, attained at t = exp(s).
* ``CHI2``: phi*(s) = s + s**2/4 for s >= -2 (attained at t = 1 + s/2),
  and -1 for s < -2 (attained at the boundary t = 0).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DivergenceKind",
    "DivergenceSpec",
    "phi_value",
    "phi_conjugate",
    "phi_divergence",
    "uniform_pmf",
    "validate_pmf",
]

#: Tolerance on |sum(p) - 1| accepted by :func:`validate_pmf`.
PMF_SUM_TOL = 1e-9
#: Most-negative entry accepted by :func:`validate_pmf` (rounding slack).
PMF_NEG_TOL = -1e-12


class DivergenceKind(enum.Enum):
    """Supported phi-divergence generators."""

    KL = "kl"
    CHI2 = "chi2"


@dataclass(frozen=True)
class DivergenceSpec:
    """A divergence kind together with a nonnegative ball radius ``rho``."""

    kind: DivergenceKind
    rho: float

    def __post_init__(self) -> None:
        if not (self.rho >= 0.0):
            raise ValueError(f"rho must be nonnegative, got {self.rho}")


def phi_value(kind: DivergenceKind, t):
    """Evaluate the generator ``phi`` at ``t >= 0``.

    Parameters
    ----------
    kind : DivergenceKind
    t : float or array_like
        Nonnegative argument(s).  ``phi(1) = 0`` exactly for both kinds;
        at ``t = 0`` the KL generator returns its limit value 1.

    Returns
    -------
    float or ndarray
        Scalar input gives a float, array input an array.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise ValueError("phi is only defined for t >= 0")
    if kind is DivergenceKind.KL:
        # t*ln(t) -> 0 as t -> 0+, so the t = 0 value is 0 - 0 + 1 = 1.
        safe = np.where(t > 0.0, t, 1.0)
        out = safe * np.log(safe) - t + 1.0
    elif kind is DivergenceKind.CHI2:
        out = (t - 1.0) ** 2
    else:
        raise ValueError(f"unknown divergence kind: {kind!r}")
    return float(out) if out.ndim == 0 else out


def phi_conjugate(kind: DivergenceKind, s):
    """Evaluate the convex conjugate ``phi*(s) = max_{t>=0} {s*t - phi(t)}``.

    Defined for every real ``s``.  See the module docstring for the closed
    forms and where each maximum is attained.
    """
    s = np.asarray(s, dtype=float)
    if kind is DivergenceKind.KL:
        out = np.expm1(s)
    elif kind is DivergenceKind.CHI2:
        out = np.where(s >= -2.0, s + 0.25 * s * s, -1.0)
    else:
        raise ValueError(f"unknown divergence kind: {kind!r}")
    return float(out) if out.ndim == 0 else out


def validate_pmf(p) -> np.ndarray:
    """Check that ``p`` is a probability vector and return it as an array.

    Entries may undershoot zero by at most ``PMF_NEG_TOL`` (they are
    clipped), and the total mass must be 1 within ``PMF_SUM_TOL``.
    """
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("pmf must be a nonempty 1-D vector")
    if not np.all(np.isfinite(p)):
        raise ValueError("pmf entries must be finite")
    if np.min(p) < PMF_NEG_TOL:
        raise ValueError(f"pmf has a negative entry: min = {np.min(p)}")
    total = float(np.sum(p))
    if abs(total - 1.0) > PMF_SUM_TOL:
        raise ValueError(f"pmf does not sum to 1: sum = {total!r}")
    return np.maximum(p, 0.0)


def phi_divergence(p, kind: DivergenceKind) -> float:
    """Divergence of the pmf ``p`` from the uniform base on its support.

    Computes ``(1/M) * sum_m phi(M * p_m)`` for ``M = len(p)``.  The value
    is 0 exactly when ``p`` is uniform and positive otherwise.
    """
    p = validate_pmf(p)
    m = p.size
    return float(np.sum(phi_value(kind, m * p)) / m)


def uniform_pmf(m: int) -> np.ndarray:
    """The uniform pmf on ``m`` support points."""
    if m < 1:
        raise ValueError("support size must be at least 1")
    return np.full(m, 1.0 / m)
