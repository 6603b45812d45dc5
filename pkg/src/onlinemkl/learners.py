"""Single-kernel online learner in random-feature space.

Keeps a weight vector over the 2D feature coordinates and performs one
gradient step per sample, so per-step cost and memory stay constant as
the stream grows.
"""

from __future__ import annotations

from typing import Callable, Optional, Union

import numpy as np

from .features import FeatureMap
from .losses import LossSpec, loss_gradient

Stepsize = Union[float, Callable[[int], float]]


class KernelLearner:
    """Online gradient descent on one random-feature map.

    Parameters
    ----------
    feature_map : FeatureMap
        Shared, read-only feature map; the weight vector has length
        ``feature_map.output_dim``.
    eta_theta : float or callable
        Constant stepsize, or a callable mapped over the 1-based step
        index for time-varying schedules.
    loss : LossSpec
        Loss driving the gradient.
    projection_radius : float, optional
        If set, the weight vector is projected back onto the ball of
        this radius after every step. Off by default.
    """

    def __init__(
        self,
        feature_map: FeatureMap,
        eta_theta: Stepsize,
        loss: LossSpec,
        projection_radius: Optional[float] = None,
    ):
        self.feature_map = feature_map
        self.eta_theta = eta_theta
        self.loss = loss
        self.projection_radius = projection_radius
        self.theta = np.zeros(feature_map.output_dim)
        self.steps_taken = 0

    def _stepsize(self) -> float:
        if callable(self.eta_theta):
            return float(self.eta_theta(self.steps_taken + 1))
        return float(self.eta_theta)

    def predict_features(self, z: np.ndarray) -> float:
        if z.shape != self.theta.shape:
            raise ValueError(
                f"feature vector has length {z.shape}, expected {self.theta.shape}"
            )
        return float(self.theta @ z)

    def predict(self, x) -> float:
        return self.predict_features(self.feature_map.transform(x))

    def step_features(self, z: np.ndarray, y: float) -> None:
        """One gradient step on a precomputed feature vector."""
        grad = loss_gradient(self.loss, z, self.theta, y)
        if not np.all(np.isfinite(grad)):
            raise FloatingPointError(
                f"non-finite gradient at step {self.steps_taken + 1}; "
                "the stepsize is likely too large"
            )
        self.theta -= self._stepsize() * grad
        if not np.all(np.isfinite(self.theta)):
            raise FloatingPointError(
                f"weights overflowed at step {self.steps_taken + 1}; "
                "the stepsize is likely too large"
            )
        if self.projection_radius is not None:
            norm = float(np.linalg.norm(self.theta))
            if norm > self.projection_radius:
                self.theta *= self.projection_radius / norm
        self.steps_taken += 1

    def step(self, x, y: float) -> None:
        self.step_features(self.feature_map.transform(x), y)

    def theta_sq_norm(self) -> float:
        return float(self.theta @ self.theta)

    def state_size(self) -> int:
        """Stored floats, excluding the shared feature map."""
        return self.theta.size
