"""Exact-kernel online baselines: functional gradient descent with a
growing (or FIFO-budgeted) support set, single-kernel and multi-kernel.

These keep every seen sample (or the ``budget`` most recent ones) as
kernel-section centers, so per-step cost grows with the stream - the
contrast that motivates the random-feature learners. They double as
convergence oracles: for large feature counts the random-feature
learner's predictions approach the unbudgeted exact learner's.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .features import KernelSpec, kernel_cross
from .losses import LossSpec, clip_unit, data_term_slope, loss_value
from .raker import SlotReport, softmax_weights


class SupportSet:
    """Kernel-section centers with coefficients, FIFO-evicted on a budget.

    Also tracks the squared RKHS norm of the represented function
    incrementally (all supported kernels are standardized, so a center's
    self-similarity is 1).
    """

    def __init__(self, dim: int, budget: Optional[int] = None):
        if budget is not None and budget < 1:
            raise ValueError(f"budget must be positive, got {budget!r}")
        self.dim = int(dim)
        self.budget = budget
        self._x = np.empty((0, self.dim))
        self._alpha = np.empty(0)
        self.rkhs_sq_norm = 0.0

    def __len__(self) -> int:
        return self._alpha.shape[0]

    @property
    def centers(self) -> np.ndarray:
        return self._x

    @property
    def coefficients(self) -> np.ndarray:
        return self._alpha

    def scale(self, c: float) -> None:
        self._alpha = self._alpha * c
        self.rkhs_sq_norm *= c * c

    def append(self, x: np.ndarray, alpha: float, value_at_x: float) -> None:
        """Add a center; ``value_at_x`` is the current function value there."""
        self._x = np.vstack([self._x, np.asarray(x, dtype=np.float64)[None, :]])
        self._alpha = np.append(self._alpha, alpha)
        self.rkhs_sq_norm += 2.0 * alpha * value_at_x + alpha * alpha

    def pop_oldest(self):
        x0, a0 = self._x[0].copy(), float(self._alpha[0])
        self._x = self._x[1:]
        self._alpha = self._alpha[1:]
        return x0, a0

    def over_budget(self) -> bool:
        return self.budget is not None and len(self) > self.budget

    def state_size(self) -> int:
        return self._x.size + self._alpha.size


def exact_predict(ss: SupportSet, spec: KernelSpec, x) -> float:
    """Sum of coefficient-weighted kernel values over the support set."""
    if len(ss) == 0:
        return 0.0
    return float(ss.coefficients @ kernel_cross(spec, ss.centers, x))


def exact_step(
    ss: SupportSet,
    spec: KernelSpec,
    loss: LossSpec,
    x,
    y: float,
    eta: float,
) -> float:
    """Functional gradient step: shrink coefficients by ``1 - 2*eta*lam``,
    append the new sample scaled by minus eta times the loss slope, then
    FIFO-evict if over budget. Returns the pre-step prediction.
    """
    if not (eta > 0):
        raise ValueError(f"eta must be positive, got {eta!r}")
    f_x = exact_predict(ss, spec, x)
    shrink = 1.0 - 2.0 * eta * loss.lam
    ss.scale(shrink)
    alpha_new = -eta * data_term_slope(loss, f_x, y)
    if alpha_new != 0.0:
        ss.append(np.asarray(x, dtype=np.float64), alpha_new, shrink * f_x)
        if ss.over_budget():
            # norm bookkeeping needs the evicted center's value under the
            # post-append function
            x0 = ss.centers[0]
            a0 = float(ss.coefficients[0])
            f_x0 = exact_predict(ss, spec, x0)
            ss.pop_oldest()
            ss.rkhs_sq_norm += -2.0 * a0 * f_x0 + a0 * a0
    return f_x


class ExactKernelLearner:
    """Single-kernel functional online learner (optionally budgeted)."""

    def __init__(
        self,
        spec: KernelSpec,
        loss: LossSpec,
        eta: float,
        budget: Optional[int] = None,
    ):
        self.spec = spec
        self.loss = loss
        self.eta = float(eta)
        self.support = SupportSet(spec.input_dim, budget)
        self.steps_taken = 0

    def predict(self, x) -> float:
        return exact_predict(self.support, self.spec, x)

    def step(self, x, y: float) -> None:
        exact_step(self.support, self.spec, self.loss, x, y, self.eta)
        self.steps_taken += 1

    def state_size(self) -> int:
        return self.support.state_size()


class OMKL:
    """Exact-kernel multi-kernel learner with multiplicative weights.

    Mirrors the Raker update slot for slot, with exact kernel sections
    in place of random features. ``budget`` selects the FIFO-budgeted
    variant.
    """

    def __init__(
        self,
        kernels: Sequence[KernelSpec],
        eta_theta: float,
        eta_weight: float,
        loss: LossSpec,
        budget: Optional[int] = None,
    ):
        if len(kernels) < 1:
            raise ValueError("at least one kernel is required")
        if not (0.0 < eta_weight < 1.0):
            raise ValueError(f"eta_weight must lie in (0, 1), got {eta_weight!r}")
        self.kernels = list(kernels)
        self.eta_theta = float(eta_theta)
        self.eta_weight = float(eta_weight)
        self.loss = loss
        self.budget = budget
        self.supports = [SupportSet(k.input_dim, budget) for k in self.kernels]
        self.log_weights = np.zeros(len(self.kernels))
        self.steps_taken = 0

    @property
    def kernel_labels(self) -> tuple:
        return tuple(k.label for k in self.kernels)

    @property
    def normalized_weights(self) -> np.ndarray:
        return softmax_weights(self.log_weights)

    def predict(self, x):
        per_kernel = np.array(
            [exact_predict(ss, k, x) for ss, k in zip(self.supports, self.kernels)]
        )
        weights = self.normalized_weights
        return float(weights @ per_kernel), per_kernel

    def update(self, x, y: float) -> SlotReport:
        weights = self.normalized_weights
        per_pred = np.array(
            [exact_predict(ss, k, x) for ss, k in zip(self.supports, self.kernels)]
        )
        prediction = float(weights @ per_pred)
        norms = np.array([ss.rkhs_sq_norm for ss in self.supports])
        per_loss = np.array(
            [
                loss_value(self.loss, float(p), y, float(n))
                for p, n in zip(per_pred, norms)
            ]
        )
        if not np.all(np.isfinite(per_loss)):
            raise FloatingPointError(
                f"non-finite per-kernel loss at slot {self.steps_taken + 1}"
            )
        combined_loss = loss_value(self.loss, prediction, y, float(weights @ norms))
        report = SlotReport(
            t=self.steps_taken + 1,
            prediction=prediction,
            combined_loss=combined_loss,
            per_expert_predictions=per_pred,
            per_expert_losses=per_loss,
            normalized_weights=weights,
            labels=self.kernel_labels,
        )

        for ss, k in zip(self.supports, self.kernels):
            exact_step(ss, k, self.loss, x, y, self.eta_theta)
        if self.loss.clip_for_weights:
            weight_losses = np.array([clip_unit(v) for v in per_loss])
        else:
            weight_losses = per_loss
        self.log_weights = self.log_weights - self.eta_weight * weight_losses
        self.steps_taken += 1
        return report

    def state_size(self) -> int:
        return sum(ss.state_size() for ss in self.supports) + self.log_weights.size
