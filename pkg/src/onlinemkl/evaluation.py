"""Metrics, batch least-squares oracles in feature space, and empirical
static/dynamic regret measurement.

The static comparator is the best fixed weight vector per kernel in the
*feature* space (ridge normal equations over the whole stream), with the
best kernel selected by cumulative loss. The piecewise-dynamic
comparator re-solves that problem per segment of a switching stream.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .features import FeatureMap, KernelSpec, kernel_cross
from .data import StreamRecord

MAX_ORACLE_DIM = 2000  # dense normal equations beyond this are refused


class OracleError(RuntimeError):
    pass


def mse_curve(preds, ys) -> np.ndarray:
    """Running mean squared error after each slot."""
    preds = np.asarray(preds, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if preds.shape != ys.shape or preds.ndim != 1:
        raise ValueError(f"length mismatch: {preds.shape} vs {ys.shape}")
    sq = (ys - preds) ** 2
    return np.cumsum(sq) / np.arange(1, sq.size + 1)


def error_curve(preds, ys) -> np.ndarray:
    """Running classification error; a zero prediction counts as a miss."""
    preds = np.asarray(preds, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if preds.shape != ys.shape or preds.ndim != 1:
        raise ValueError(f"length mismatch: {preds.shape} vs {ys.shape}")
    if not np.all(np.isin(ys, (-1.0, 1.0))):
        raise ValueError("labels must be -1 or +1")
    miss = (ys * preds <= 0).astype(np.float64)
    return np.cumsum(miss) / np.arange(1, miss.size + 1)


def class_error(preds, ys) -> float:
    """Final fraction of sign disagreements."""
    return float(error_curve(preds, ys)[-1])


@dataclass
class OracleResult:
    theta_stars: List[np.ndarray]
    per_kernel_losses: np.ndarray  # cumulative regularized loss per kernel
    best_index: int
    oracle_loss: float
    per_slot_losses: np.ndarray  # per-slot losses of the best kernel's solution


def _stream_arrays(records: Sequence[StreamRecord]):
    X = np.stack([r.x for r in records])
    y = np.array([r.y for r in records])
    return X, y


def batch_rf_oracle(
    records: Sequence[StreamRecord],
    feature_maps: Sequence[FeatureMap],
    lam: float,
) -> OracleResult:
    """Best fixed feature-space weight vector per kernel, in hindsight.

    Solves ``(Z'Z + lam*T*I) theta = Z'y`` per kernel and scores each
    solution by its cumulative regularized squared error; the reported
    oracle is the minimizing kernel. With ``lam == 0`` a rank-deficient
    system raises instead of returning a spurious solution.
    """
    if not records:
        raise ValueError("stream must be non-empty")
    X, y = _stream_arrays(records)
    T = y.size
    theta_stars, cum_losses, slot_losses = [], [], []
    for fm in feature_maps:
        if fm.output_dim > MAX_ORACLE_DIM:
            raise OracleError(
                f"oracle limited to {MAX_ORACLE_DIM} feature dimensions, "
                f"got {fm.output_dim}"
            )
        Z = fm.transform_many(X)
        A = Z.T @ Z + (lam * T) * np.eye(Z.shape[1])
        b = Z.T @ y
        if lam == 0.0 and np.linalg.matrix_rank(A, hermitian=True) < A.shape[0]:
            raise OracleError(
                "unregularized normal equations are rank deficient; use lam > 0"
            )
        try:
            theta = np.linalg.solve(A, b)
        except np.linalg.LinAlgError as exc:
            raise OracleError(f"normal equations singular: {exc}") from exc
        opt_residual = float(np.linalg.norm(A @ theta - b))
        if opt_residual > 1e-6 * max(1.0, float(np.linalg.norm(b))):
            raise OracleError(
                f"normal equations ill-conditioned (residual {opt_residual:.3g}); "
                "use lam > 0"
            )
        resid = Z @ theta - y
        reg = lam * float(theta @ theta)
        per_slot = resid**2 + reg
        theta_stars.append(theta)
        cum_losses.append(float(np.sum(per_slot)))
        slot_losses.append(per_slot)
    cum_losses = np.array(cum_losses)
    best = int(np.argmin(cum_losses))
    return OracleResult(
        theta_stars=theta_stars,
        per_kernel_losses=cum_losses,
        best_index=best,
        oracle_loss=float(cum_losses[best]),
        per_slot_losses=slot_losses[best],
    )


def batch_exact_oracle(
    records: Sequence[StreamRecord],
    kernels: Sequence[KernelSpec],
    lam: float,
    max_horizon: int = 1000,
) -> float:
    """Full kernel-matrix ridge comparator; cubic cost, desk scale only."""
    if len(records) > max_horizon:
        raise OracleError(
            f"exact oracle limited to {max_horizon} slots, got {len(records)}"
        )
    X, y = _stream_arrays(records)
    T = y.size
    best = np.inf
    for spec in kernels:
        K = np.stack([kernel_cross(spec, X, x) for x in X])
        alpha = np.linalg.solve(K + lam * T * np.eye(T), y)
        fitted = K @ alpha
        loss = float(np.sum((fitted - y) ** 2)) + lam * T * float(alpha @ K @ alpha)
        best = min(best, loss)
    return best


@dataclass
class RegretTrace:
    """Cumulative algorithm loss against a static comparator."""

    cum_algo: np.ndarray
    cum_oracle: np.ndarray
    regret: np.ndarray
    checkpoints: List[tuple]  # (t, regret(t) / sqrt(t))

    @property
    def horizon(self) -> int:
        return self.cum_algo.size

    @property
    def final_regret(self) -> float:
        return float(self.regret[-1])

    def rows(self):
        """Telemetry rows: t, cum_algo, cum_oracle, regret, regret/sqrt(t)."""
        for i in range(self.horizon):
            t = i + 1
            yield (
                t,
                float(self.cum_algo[i]),
                float(self.cum_oracle[i]),
                float(self.regret[i]),
                float(self.regret[i]) / np.sqrt(t),
            )


def static_regret(algo_losses, oracle_losses) -> RegretTrace:
    """Regret trace of per-slot algorithm losses vs. the batch comparator.

    ``oracle_losses`` may be the comparator's per-slot loss sequence or a
    single cumulative total, which is then attributed uniformly across
    slots. Checkpoints are recorded at powers of two.
    """
    algo_losses = np.asarray(algo_losses, dtype=np.float64)
    T = algo_losses.size
    if np.isscalar(oracle_losses) or np.ndim(oracle_losses) == 0:
        oracle_losses = np.full(T, float(oracle_losses) / T)
    else:
        oracle_losses = np.asarray(oracle_losses, dtype=np.float64)
        if oracle_losses.shape != algo_losses.shape:
            raise ValueError("oracle losses must be scalar or match the algorithm's")
    cum_algo = np.cumsum(algo_losses)
    cum_oracle = np.cumsum(oracle_losses)
    regret = cum_algo - cum_oracle
    checkpoints = []
    t = 1
    while t <= T:
        checkpoints.append((t, float(regret[t - 1]) / np.sqrt(t)))
        t *= 2
    return RegretTrace(cum_algo, cum_oracle, regret, checkpoints)


def dynamic_regret_piecewise(
    algo_losses,
    records: Sequence[StreamRecord],
    switch_points: Sequence[int],
    feature_maps: Sequence[FeatureMap],
    lam: float,
) -> float:
    """Regret against per-segment batch oracles on a switching stream.

    ``switch_points`` lists the first slot of every segment after the
    first; they must be known (synthetic streams). The comparator is the
    best fixed feature-space function per segment.
    """
    algo_losses = np.asarray(algo_losses, dtype=np.float64)
    T = len(records)
    if algo_losses.size != T:
        raise ValueError("algorithm losses must cover the whole stream")
    points = sorted(int(p) for p in switch_points)
    if any(p < 2 or p > T for p in points):
        raise ValueError(f"switch points must lie in [2, {T}]")
    bounds = [1] + points + [T + 1]
    comparator = 0.0
    for lo, hi in zip(bounds, bounds[1:]):
        segment = records[lo - 1 : hi - 1]
        comparator += batch_rf_oracle(segment, feature_maps, lam).oracle_loss
    return float(np.sum(algo_losses) - comparator)
