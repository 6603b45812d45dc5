"""AdaRaker: a hierarchical ensemble of Raker instances.

The horizon is covered by dyadic intervals: for each level j, intervals
of length 2^j tile the timeline back-to-back starting at slot 2^j. Every
slot t therefore lies in exactly floor(log2 t) + 1 active intervals. A
fresh Raker instance is launched when an interval opens, runs with the
interval-specific rate ``min(1/2, eta0 / sqrt(len))``, and is retired
when the interval closes.

The ensemble output mixes instance outputs with multiplicative weights.
An instance's weight is assigned at the end of its opening slot, so it
joins the mixture from its second slot on; from then on each slot
multiplies the weight by ``exp(eta * (ensemble_loss - instance_loss))``,
growing the weight of instances that beat the ensemble. On slots where
every active interval opens at once (slot 1 and exact powers of two, a
property of the dyadic cover) there is no seasoned instance, and the
opening instances are mixed at their spawn weights instead.

Instance weights live in log-domain; all instances share one feature
map per kernel, so memory grows only with the number of live instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from .features import FeatureMap, FeatureVariant, KernelSpec, derive_seed, sample_spectral
from .losses import LossSpec, clip_unit, loss_value
from .raker import Raker, SlotReport, softmax_weights


@dataclass(frozen=True, order=True)
class Interval:
    """Slot interval [start, end] of length 2**level."""

    start: int
    end: int
    level: int

    def __post_init__(self):
        size = self.end - self.start + 1
        if size != 2**self.level:
            raise ValueError(f"interval {self} must have length 2**{self.level}")
        if self.start < 1:
            raise ValueError(f"interval {self} must start at slot 1 or later")

    @property
    def length(self) -> int:
        return self.end - self.start + 1

    @property
    def label(self) -> str:
        return f"{self.start}-{self.end}"


def active_intervals(t: int) -> List[Interval]:
    """All dyadic intervals containing slot t, sorted by level.

    Level-j intervals exist once t >= 2**j, so the result has exactly
    floor(log2 t) + 1 entries.
    """
    if t < 1:
        raise ValueError(f"slot index must be >= 1, got {t}")
    out = []
    j = 0
    size = 1
    while size <= t:
        start = (t // size) * size
        out.append(Interval(start=start, end=start + size - 1, level=j))
        j += 1
        size *= 2
    return out


class _Instance:
    __slots__ = ("raker", "log_h", "eta")

    def __init__(self, raker: Raker, log_h: float, eta: float):
        self.raker = raker
        self.log_h = log_h
        self.eta = eta


class AdaRaker:
    """Ensemble of interval-scoped Rakers with interval-specific rates.

    Parameters
    ----------
    feature_maps : sequence of FeatureMap
        One shared map per dictionary kernel, reused by every instance.
    loss : LossSpec
        Loss for instances and for the ensemble weighting.
    eta0 : float
        Scale of the interval rates ``min(1/2, eta0 / sqrt(len))``.
    schedule : callable, optional
        Maps a slot index to its active intervals; defaults to the
        dyadic cover. Override to restrict or redesign the interval set.
    eta_theta, eta_weight : optional
        Per-instance stepsize overrides. By default both equal the
        instance's interval rate.
    literal_relative_loss : bool
        If True, an instance's weight is multiplied by
        ``exp(-eta * (ensemble_loss - instance_loss))``, which shrinks
        the weight of instances currently beating the ensemble. The
        default flips the exponent's sign so that outperforming
        instances gain weight, which is what makes the ensemble track
        regime changes.
    """

    def __init__(
        self,
        feature_maps: Sequence[FeatureMap],
        loss: LossSpec,
        eta0: float = 10.0,
        schedule: Callable[[int], List[Interval]] = active_intervals,
        eta_theta=None,
        eta_weight: Optional[float] = None,
        literal_relative_loss: bool = False,
        projection_radius: Optional[float] = None,
    ):
        if not (eta0 > 0):
            raise ValueError(f"eta0 must be positive, got {eta0!r}")
        self.feature_maps = list(feature_maps)
        self.loss = loss
        self.eta0 = float(eta0)
        self.schedule = schedule
        self.eta_theta_override = eta_theta
        self.eta_weight_override = eta_weight
        self.literal_relative_loss = bool(literal_relative_loss)
        self.projection_radius = projection_radius
        self.instances: dict = {}
        self.steps_taken = 0

    @classmethod
    def create(
        cls,
        kernels: Sequence[KernelSpec],
        num_features: int,
        variant: FeatureVariant,
        loss: LossSpec,
        seed: int,
        eta0: float = 10.0,
        **kwargs,
    ) -> "AdaRaker":
        maps = [
            sample_spectral(spec, num_features, variant, derive_seed(seed, p))
            for p, spec in enumerate(kernels)
        ]
        return cls(maps, loss, eta0=eta0, **kwargs)

    def interval_rate(self, interval: Interval) -> float:
        return min(0.5, self.eta0 / math.sqrt(interval.length))

    def _new_instance(self, interval: Interval) -> _Instance:
        eta = self.interval_rate(interval)
        eta_theta = self.eta_theta_override if self.eta_theta_override is not None else eta
        eta_weight = self.eta_weight_override if self.eta_weight_override is not None else eta
        raker = Raker(
            self.feature_maps,
            eta_theta=eta_theta,
            eta_weight=eta_weight,
            loss=self.loss,
            projection_radius=self.projection_radius,
        )
        return _Instance(raker, log_h=math.log(eta), eta=eta)

    def _slot_layout(self, t: int):
        """Active intervals at t plus each one's mixture weight.

        Instances still in their opening slot carry weight zero unless
        every active interval is opening, in which case spawn weights
        are used (the dyadic cover opens all levels at powers of two).
        Returns (intervals, seasoned_mask, normalized_weights, log_h).
        """
        intervals = self.schedule(t)
        if not intervals:
            raise RuntimeError(f"empty active interval set at slot {t}")
        log_h = []
        seasoned = []
        for interval in intervals:
            inst = self.instances.get(interval)
            if inst is None and interval.start != t:
                raise RuntimeError(
                    f"interval {interval} active at slot {t} was never spawned; "
                    "slots must be processed consecutively"
                )
            is_seasoned = interval.start < t
            seasoned.append(is_seasoned)
            log_h.append(
                inst.log_h if inst is not None else math.log(self.interval_rate(interval))
            )
        log_h = np.array(log_h)
        seasoned = np.array(seasoned, dtype=bool)
        weights = np.zeros(len(intervals))
        pool = seasoned if seasoned.any() else np.ones(len(intervals), dtype=bool)
        weights[pool] = softmax_weights(log_h[pool])
        return intervals, seasoned, weights, log_h

    def predict(self, x):
        """Ensemble prediction for the upcoming slot, and each instance's.

        Mirrors ``update`` exactly: intervals opening at the upcoming
        slot are treated as fresh zero-prediction instances.
        """
        t = self.steps_taken + 1
        intervals, _, weights, _ = self._slot_layout(t)
        zs = [fm.transform(x) for fm in self.feature_maps]
        preds = np.array(
            [
                self.instances[iv].raker.predict_features(zs)[0]
                if iv in self.instances
                else 0.0
                for iv in intervals
            ]
        )
        per_instance = {iv: float(p) for iv, p in zip(intervals, preds)}
        return float(weights @ preds), per_instance

    def update(self, x, y: float) -> SlotReport:
        """Advance one slot: spawn, predict, reweigh, step, retire."""
        t = self.steps_taken + 1
        intervals, seasoned, weights, _ = self._slot_layout(t)
        for interval in intervals:
            if interval not in self.instances:
                self.instances[interval] = self._new_instance(interval)

        zs = [fm.transform(x) for fm in self.feature_maps]
        insts = [self.instances[iv] for iv in intervals]
        inst_preds = np.array(
            [inst.raker.predict_features(zs)[0] for inst in insts]
        )
        prediction = float(weights @ inst_preds)
        inst_regs = np.array([inst.raker.mixture_reg() for inst in insts])
        inst_losses = np.array(
            [
                loss_value(self.loss, float(p), y, float(reg))
                for p, reg in zip(inst_preds, inst_regs)
            ]
        )
        ensemble_loss = loss_value(self.loss, prediction, y, float(weights @ inst_regs))
        if not np.isfinite(ensemble_loss) or not np.all(np.isfinite(inst_losses)):
            raise FloatingPointError(f"non-finite ensemble loss at slot {t}")

        report = SlotReport(
            t=t,
            prediction=prediction,
            combined_loss=ensemble_loss,
            per_expert_predictions=inst_preds,
            per_expert_losses=inst_losses,
            normalized_weights=weights,
            labels=tuple(iv.label for iv in intervals),
        )

        # relative-loss reweighting applies from an instance's second slot on
        sign = -1.0 if self.literal_relative_loss else 1.0
        if self.loss.clip_for_weights:
            ens = clip_unit(ensemble_loss)
            rel = np.array([ens - clip_unit(v) for v in inst_losses])
        else:
            rel = ensemble_loss - inst_losses
        for inst, is_seasoned, r in zip(insts, seasoned, rel):
            if not is_seasoned:
                continue
            inst.log_h += sign * inst.eta * float(r)
            if not np.isfinite(inst.log_h):
                raise FloatingPointError(f"non-finite instance weight at slot {t}")

        for inst in insts:
            inst.raker.update_features(zs, y)

        for interval in list(self.instances):
            if interval.end == t:
                del self.instances[interval]
        self.steps_taken = t
        return report

    def num_active(self) -> int:
        return len(self.instances)

    def state_size(self) -> int:
        """Stored floats: shared maps plus per-instance weight vectors."""
        maps = sum(fm.spectral_matrix.size for fm in self.feature_maps)
        per_instance = sum(
            sum(l.state_size() for l in inst.raker.learners)
            + inst.raker.log_weights.size
            + 1
            for inst in self.instances.values()
        )
        return maps + per_instance
