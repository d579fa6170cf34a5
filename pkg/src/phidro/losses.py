"""Loss models: logistic regression, optionally with a ridge term.

The plain logistic loss is convex but not strongly convex; adding
(mu/2)*||theta||^2 per sample makes it mu-strongly convex, which the
step-size theory for the outer method requires.  Batch helpers evaluate
the per-sample loss vector and the pmf-weighted subgradient the robust
objective hands to the optimizer.

All batch reductions run in index order, so repeated evaluation on the
same inputs is bitwise deterministic.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

__all__ = [
    "LossKind",
    "LossModel",
    "loss_value",
    "loss_gradient",
    "batch_objective_vector",
    "robust_subgradient",
    "gradient_lipschitz_bound",
    "step_size_bound",
]


class LossKind(enum.Enum):
    LOGISTIC = "logistic"
    RIDGE_LOGISTIC = "ridge_logistic"


@dataclass(frozen=True)
class LossModel:
    kind: LossKind
    dim: int
    mu: float = 0.0

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError(f"dimension must be positive, got {self.dim}")
        if self.kind is LossKind.RIDGE_LOGISTIC:
            if not (self.mu > 0.0):
                raise ValueError(f"ridge coefficient must be positive, got {self.mu}")
        elif self.mu != 0.0:
            raise ValueError("plain logistic loss takes no ridge coefficient")


def _check_theta(model: LossModel, theta: np.ndarray) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (model.dim,):
        raise ValueError(f"theta has shape {theta.shape}, expected ({model.dim},)")
    return theta


def _check_label(y: float) -> float:
    y = float(y)
    if y not in (-1.0, 1.0):
        raise ValueError(f"labels must be -1 or +1, got {y}")
    return y


def _stable_softplus_neg(a):
    # log(1 + exp(-a)) without overflow for large |a|
    return np.log1p(np.exp(-np.abs(a))) + np.maximum(0.0, -a)


def loss_value(model: LossModel, theta, x, y) -> float:
    theta = _check_theta(model, theta)
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.dim,):
        raise ValueError(f"x has shape {x.shape}, expected ({model.dim},)")
    y = _check_label(y)
    a = y * float(np.dot(theta, x))
    val = float(_stable_softplus_neg(a))
    if model.kind is LossKind.RIDGE_LOGISTIC:
        val += 0.5 * model.mu * float(np.dot(theta, theta))
    return val


def loss_gradient(model: LossModel, theta, x, y) -> np.ndarray:
    theta = _check_theta(model, theta)
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.dim,):
        raise ValueError(f"x has shape {x.shape}, expected ({model.dim},)")
    y = _check_label(y)
    a = y * float(np.dot(theta, x))
    grad = (-y * float(expit(-a))) * x
    if model.kind is LossKind.RIDGE_LOGISTIC:
        grad = grad + model.mu * theta
    return grad


def _batch_margin(model: LossModel, theta: np.ndarray, data, idx: np.ndarray):
    x = data.x[idx]
    y = data.y[idx]
    return x, y, y * (x @ theta)


def batch_objective_vector(model: LossModel, theta, data, idx) -> np.ndarray:
    """Per-sample losses at ``theta`` for the rows in ``idx``, in idx order."""
    theta = _check_theta(model, theta)
    idx = np.asarray(idx)
    _, _, a = _batch_margin(model, theta, data, idx)
    z = _stable_softplus_neg(a)
    if model.kind is LossKind.RIDGE_LOGISTIC:
        z = z + 0.5 * model.mu * float(np.dot(theta, theta))
    return z


def robust_subgradient(model: LossModel, theta, data, idx, pmf) -> np.ndarray:
    """Pmf-weighted gradient sum over the rows in ``idx``.

    With the worst-case pmf from the inner solver this is a subgradient
    of the robust objective; with the uniform pmf it is the batch mean
    gradient.
    """
    theta = _check_theta(model, theta)
    idx = np.asarray(idx)
    pmf = np.asarray(pmf, dtype=np.float64)
    if pmf.shape != idx.shape:
        raise ValueError(f"pmf has shape {pmf.shape}, expected {idx.shape}")
    x, y, a = _batch_margin(model, theta, data, idx)
    coef = pmf * y * expit(-a)
    grad = -(x.T @ coef)
    if model.kind is LossKind.RIDGE_LOGISTIC:
        grad = grad + model.mu * theta
    return grad


def gradient_lipschitz_bound(model: LossModel, data) -> float:
    """Smoothness constant: quarter of the largest squared row norm, plus mu."""
    sq = np.einsum("nd,nd->n", data.x, data.x)
    return 0.25 * float(np.max(sq)) + model.mu


def step_size_bound(model: LossModel, data) -> float:
    """Largest admissible constant step: min(1/(4L), 4*mu), or 1/(4L) if mu=0."""
    cap = 1.0 / (4.0 * gradient_lipschitz_bound(model, data))
    if model.mu > 0.0:
        return min(cap, 4.0 * model.mu)
    return cap
