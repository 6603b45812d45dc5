"""Loss functions with exact (sub)gradients in the feature-weight vector.

Every loss is the data-fit term plus an additive ridge penalty
``lam * ||theta||^2``. Gradients are derivatives of the stated values,
verified by finite differences in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class LossKind(Enum):
    SQUARED_ERROR = "squared_error"
    HINGE = "hinge"
    LOGISTIC = "logistic"


@dataclass(frozen=True)
class LossSpec:
    """Loss kind, ridge weight, and weight-update clipping policy.

    ``clip_for_weights`` controls whether per-expert losses are clamped
    to [-1, 1] before they enter multiplicative weight updates; it has
    no effect on gradient steps.
    """

    kind: LossKind
    lam: float = 0.01
    clip_for_weights: bool = True

    def __post_init__(self):
        if isinstance(self.kind, str):
            object.__setattr__(self, "kind", LossKind(self.kind.lower()))
        if self.lam < 0:
            raise ValueError(f"lam must be non-negative, got {self.lam!r}")


def _check_label(y: float) -> float:
    if y not in (-1.0, 1.0):
        raise ValueError(f"classification label must be -1 or +1, got {y!r}")
    return float(y)


def _sigmoid(v: float) -> float:
    # overflow-safe in both tails
    if v >= 0:
        return 1.0 / (1.0 + np.exp(-v))
    e = np.exp(v)
    return e / (1.0 + e)


def loss_value(spec: LossSpec, pred: float, y: float, theta_sq_norm: float = 0.0) -> float:
    """Loss of a scalar prediction, including the ridge term.

    squared_error: (y - pred)^2         + lam * ||theta||^2
    hinge:         max(0, 1 - y * pred) + lam * ||theta||^2
    logistic:      ln(1 + e^(-y*pred))  + lam * ||theta||^2
    """
    reg = spec.lam * theta_sq_norm
    if spec.kind is LossKind.SQUARED_ERROR:
        r = y - pred
        return r * r + reg
    y = _check_label(y)
    if spec.kind is LossKind.HINGE:
        return max(0.0, 1.0 - y * pred) + reg
    # logistic, via logaddexp for stability at large |pred|
    return float(np.logaddexp(0.0, -y * pred)) + reg


def loss_gradient(spec: LossSpec, z: np.ndarray, theta: np.ndarray, y: float) -> np.ndarray:
    """(Sub)gradient of ``loss_value`` with respect to theta at pred = theta.z.

    The hinge subgradient at the kink (margin exactly 1) uses a zero
    data term.
    """
    z = np.asarray(z, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    if z.shape != theta.shape or z.ndim != 1:
        raise ValueError(f"z and theta must be equal-length vectors, got {z.shape} vs {theta.shape}")
    pred = float(theta @ z)
    reg = (2.0 * spec.lam) * theta
    if spec.kind is LossKind.SQUARED_ERROR:
        return 2.0 * (pred - y) * z + reg
    y = _check_label(y)
    if spec.kind is LossKind.HINGE:
        if y * pred < 1.0:
            return -y * z + reg
        return reg
    return (-y * _sigmoid(-y * pred)) * z + reg


def data_term_slope(spec: LossSpec, pred: float, y: float) -> float:
    """Derivative of the data-fit term with respect to the prediction.

    Used by exact-kernel learners, whose update appends a kernel section
    scaled by minus the stepsize times this slope.
    """
    if spec.kind is LossKind.SQUARED_ERROR:
        return 2.0 * (pred - y)
    y = _check_label(y)
    if spec.kind is LossKind.HINGE:
        return -y if y * pred < 1.0 else 0.0
    return -y * _sigmoid(-y * pred)


def clip_unit(v: float) -> float:
    """Clamp a finite scalar to [-1, 1]."""
    v = float(v)
    if np.isnan(v):
        raise ValueError("cannot clip NaN")
    return min(max(v, -1.0), 1.0)
