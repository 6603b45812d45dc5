"""Raker: random-feature online multi-kernel learning.

One gradient-descent learner per dictionary kernel plus multiplicative
combination weights. Per slot, the combined prediction is the
weight-averaged per-kernel prediction; afterwards each learner takes a
gradient step and each weight is scaled by ``exp(-eta_w * loss_p)``.

Weights are stored as logarithms and normalized lazily by a softmax, so
long streams cannot underflow them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .features import FeatureMap, FeatureVariant, KernelSpec, derive_seed, sample_spectral
from .learners import KernelLearner, Stepsize
from .losses import LossSpec, clip_unit, loss_value


def softmax_weights(log_weights: np.ndarray) -> np.ndarray:
    """Normalized weights from log-domain storage; sums to 1."""
    shifted = np.exp(log_weights - np.max(log_weights))
    return shifted / np.sum(shifted)


@dataclass
class SlotReport:
    """Telemetry for one slot, built from the pre-update state.

    The per-expert arrays all share one length: the number of kernels
    for Raker and exact baselines, the number of active instances for
    the adaptive ensemble. ``labels`` names each entry.
    """

    t: int
    prediction: float
    combined_loss: float
    per_expert_predictions: np.ndarray
    per_expert_losses: np.ndarray
    normalized_weights: np.ndarray
    labels: tuple

    def __post_init__(self):
        n = len(self.labels)
        for arr in (
            self.per_expert_predictions,
            self.per_expert_losses,
            self.normalized_weights,
        ):
            if len(arr) != n:
                raise ValueError("per-expert fields must have equal lengths")


class Raker:
    """Multi-kernel learner over a fixed feature-map dictionary.

    Parameters
    ----------
    feature_maps : sequence of FeatureMap
        One map per dictionary kernel; maps may be shared across
        learner instances (they are read-only).
    eta_theta : float or callable
        Stepsize for the per-kernel gradient updates.
    eta_weight : float
        Stepsize in (0, 1) for the multiplicative weight updates.
    loss : LossSpec
        Loss used both for gradients and for the weight updates.
    """

    def __init__(
        self,
        feature_maps: Sequence[FeatureMap],
        eta_theta: Stepsize,
        eta_weight: float,
        loss: LossSpec,
        projection_radius: Optional[float] = None,
    ):
        if len(feature_maps) < 1:
            raise ValueError("at least one kernel is required")
        if not (0.0 < eta_weight < 1.0):
            raise ValueError(f"eta_weight must lie in (0, 1), got {eta_weight!r}")
        if not callable(eta_theta) and not (float(eta_theta) > 0):
            raise ValueError(f"eta_theta must be positive, got {eta_theta!r}")
        self.feature_maps = list(feature_maps)
        self.eta_weight = float(eta_weight)
        self.loss = loss
        self.learners = [
            KernelLearner(fm, eta_theta, loss, projection_radius)
            for fm in self.feature_maps
        ]
        # uniform initial weights: log(1/P) up to a common constant
        self.log_weights = np.zeros(len(self.feature_maps))
        self.steps_taken = 0

    @classmethod
    def create(
        cls,
        kernels: Sequence[KernelSpec],
        num_features: int,
        variant: FeatureVariant,
        eta_theta: Stepsize,
        eta_weight: float,
        loss: LossSpec,
        seed: int,
        projection_radius: Optional[float] = None,
    ) -> "Raker":
        """Build a Raker with one independently seeded map per kernel."""
        maps = [
            sample_spectral(spec, num_features, variant, derive_seed(seed, p))
            for p, spec in enumerate(kernels)
        ]
        return cls(maps, eta_theta, eta_weight, loss, projection_radius)

    @property
    def num_kernels(self) -> int:
        return len(self.learners)

    @property
    def kernel_labels(self) -> tuple:
        return tuple(fm.spec.label for fm in self.feature_maps)

    @property
    def normalized_weights(self) -> np.ndarray:
        return softmax_weights(self.log_weights)

    def features(self, x) -> list:
        return [fm.transform(x) for fm in self.feature_maps]

    def predict_features(self, zs: Sequence[np.ndarray]):
        per_kernel = np.array(
            [l.predict_features(z) for l, z in zip(self.learners, zs)]
        )
        weights = self.normalized_weights
        return float(weights @ per_kernel), per_kernel

    def predict(self, x):
        """Combined prediction and the per-kernel predictions behind it."""
        return self.predict_features(self.features(x))

    def mixture_reg(self) -> float:
        """Weight-averaged squared norm of the per-kernel weight vectors."""
        norms = np.array([l.theta_sq_norm() for l in self.learners])
        return float(self.normalized_weights @ norms)

    def update_features(self, zs: Sequence[np.ndarray], y: float) -> SlotReport:
        """Full per-slot update on precomputed feature vectors."""
        weights = self.normalized_weights
        per_pred = np.array(
            [l.predict_features(z) for l, z in zip(self.learners, zs)]
        )
        prediction = float(weights @ per_pred)
        theta_sq = np.array([l.theta_sq_norm() for l in self.learners])
        per_loss = np.array(
            [
                loss_value(self.loss, float(p), y, float(sq))
                for p, sq in zip(per_pred, theta_sq)
            ]
        )
        if not np.all(np.isfinite(per_loss)):
            raise FloatingPointError(
                f"non-finite per-kernel loss at slot {self.steps_taken + 1}"
            )
        combined_loss = loss_value(self.loss, prediction, y, float(weights @ theta_sq))
        report = SlotReport(
            t=self.steps_taken + 1,
            prediction=prediction,
            combined_loss=combined_loss,
            per_expert_predictions=per_pred,
            per_expert_losses=per_loss,
            normalized_weights=weights,
            labels=self.kernel_labels,
        )

        for learner, z in zip(self.learners, zs):
            learner.step_features(z, y)
        if self.loss.clip_for_weights:
            weight_losses = np.array([clip_unit(v) for v in per_loss])
        else:
            weight_losses = per_loss
        self.log_weights = self.log_weights - self.eta_weight * weight_losses
        self.steps_taken += 1
        return report

    def update(self, x, y: float) -> SlotReport:
        return self.update_features(self.features(x), y)

    def state_size(self) -> int:
        """Stored floats: weight vectors, log-weights, and spectral rows."""
        thetas = sum(l.state_size() for l in self.learners)
        maps = sum(fm.spectral_matrix.size for fm in self.feature_maps)
        return thetas + self.log_weights.size + maps
