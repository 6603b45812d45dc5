"""Stream sources: synthetic generators, CSV ingestion, normalization.

Synthetic regression streams follow the kernel-superposition recipe:
features are i.i.d. standard normal, the target at slot t sums
noisy-coefficient kernel sections over the whole history, with the
kernel bandwidth switching between scheduled segments. Feature entries
and regression targets are min-max normalized to [0, 1] after
generation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np

from .features import KernelFamily, KernelSpec, kernel_cross


class Task(Enum):
    REGRESSION = "regression"
    CLASSIFICATION = "classification"


@dataclass(frozen=True)
class StreamRecord:
    """One timestamped sample; slots are 1-based."""

    t: int
    x: np.ndarray
    y: float
    task: Task = Task.REGRESSION


class DataFormatError(ValueError):
    """Raised for malformed CSV input; names the offending row/column."""


@dataclass(frozen=True)
class Segment:
    start: int
    end: int
    sigma_sq: float


@dataclass(frozen=True)
class SwitchingSchedule:
    """Contiguous, non-overlapping segments covering [1, T]."""

    segments: tuple

    def __post_init__(self):
        segs = tuple(
            s if isinstance(s, Segment) else Segment(int(s[0]), int(s[1]), float(s[2]))
            for s in self.segments
        )
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise ValueError("schedule must contain at least one segment")
        if segs[0].start != 1:
            raise ValueError(f"first segment must start at 1, got {segs[0].start}")
        for prev, cur in zip(segs, segs[1:]):
            if cur.start != prev.end + 1:
                raise ValueError(
                    f"segments must be contiguous: [{prev.start},{prev.end}] "
                    f"then [{cur.start},{cur.end}]"
                )
        for s in segs:
            if s.end < s.start:
                raise ValueError(f"empty segment [{s.start},{s.end}]")
            if not (s.sigma_sq > 0):
                raise ValueError(f"sigma_sq must be positive, got {s.sigma_sq!r}")

    @property
    def horizon(self) -> int:
        return self.segments[-1].end

    @property
    def switch_points(self) -> List[int]:
        """First slot of each segment after the first."""
        return [s.start for s in self.segments[1:]]

    def sigma_sq_per_slot(self, T: int) -> np.ndarray:
        if T != self.horizon:
            raise ValueError(f"schedule covers [1,{self.horizon}] but T={T}")
        out = np.empty(T)
        for s in self.segments:
            out[s.start - 1 : s.end] = s.sigma_sq
        return out


# Published switching schedules, plus the desk-scale variant used by the
# acceptance suite (every boundary scaled by 1/12 to T=3000).
PRESET_SCHEDULES = {
    "dataset1": SwitchingSchedule(
        ((1, 8000, 1.0), (8001, 18000, 10.0), (18001, 26000, 1.0), (26001, 36000, 10.0))
    ),
    "dataset1-rescaled": SwitchingSchedule(
        ((1, 667, 1.0), (668, 1500, 10.0), (1501, 2167, 1.0), (2168, 3000, 10.0))
    ),
    "dataset2": SwitchingSchedule(
        (
            (1, 200, 0.01),
            (201, 1000, 1.0),
            (1001, 2000, 10.0),
            (2001, 2300, 0.01),
            (2301, 3000, 1.0),
            (3001, 3500, 10.0),
            (3501, 4300, 0.01),
            (4301, 5100, 1.0),
            (5101, 5900, 0.01),
            (5901, 6500, 0.1),
        )
    ),
}


def minmax_normalize(values: np.ndarray, lo=None, hi=None) -> np.ndarray:
    """Column-wise min-max scaling to [0, 1]; constant columns map to 0.

    Bounds may be supplied for streaming use where the extrema are known
    ahead of time.
    """
    values = np.asarray(values, dtype=np.float64)
    lo = np.min(values, axis=0) if lo is None else np.asarray(lo, dtype=np.float64)
    hi = np.max(values, axis=0) if hi is None else np.asarray(hi, dtype=np.float64)
    span = hi - lo
    span = np.where(span == 0, 1.0, span)
    return np.clip((values - lo) / span, 0.0, 1.0)


def _to_records(X: np.ndarray, y: np.ndarray, task: Task) -> List[StreamRecord]:
    records = []
    for i in range(X.shape[0]):
        xi = X[i].copy()
        xi.setflags(write=False)
        records.append(StreamRecord(t=i + 1, x=xi, y=float(y[i]), task=task))
    return records


def gen_switching_stream(
    schedule: SwitchingSchedule,
    d: int,
    T: int,
    sigma_alpha: float = 0.01,
    seed: int = 0,
    normalize: bool = True,
) -> List[StreamRecord]:
    """Kernel-superposition stream whose bandwidth switches per segment.

    Draw order under the seed: the (T, d) feature block first, then the
    T coefficient perturbations. Each slot's target sums Gaussian kernel
    sections over the whole history, evaluated under the bandwidth of
    the segment active at the *current* slot:

        y_t = sum_{tau <= t} (1 + e_tau) * exp(-||x_t - x_tau||^2 / (2 s_t))

    so the input-output relationship genuinely changes shape at every
    segment boundary rather than drifting by accumulation.
    """
    T = int(T)
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    sigma_sq = schedule.sigma_sq_per_slot(T)
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    X = rng.standard_normal((T, d))
    alpha = 1.0 + rng.normal(0.0, sigma_alpha, T)
    y = np.empty(T)
    for t in range(1, T + 1):
        diff = X[:t] - X[t - 1]
        sq = np.einsum("ij,ij->i", diff, diff)
        y[t - 1] = float(alpha[:t] @ np.exp(-sq / (2.0 * sigma_sq[t - 1])))
    if normalize:
        X = minmax_normalize(X)
        y = minmax_normalize(y)
    return _to_records(X, y, Task.REGRESSION)


def _stationary_parts(spec: KernelSpec, d: int, T: int, noise_std: float, seed: int):
    """Raw pieces behind ``gen_stationary_stream``, exposed for oracles."""
    if d != spec.input_dim:
        raise ValueError(f"d={d} does not match spec.input_dim={spec.input_dim}")
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    centers = rng.standard_normal((20, d))
    coeffs = rng.uniform(-1.0, 1.0, 20)
    X = rng.standard_normal((T, d))
    f_vals = np.array([coeffs @ kernel_cross(spec, centers, x) for x in X])
    noise = rng.normal(0.0, noise_std, T) if noise_std > 0 else np.zeros(T)
    return X, f_vals, noise, centers, coeffs


def gen_stationary_stream(
    spec: KernelSpec,
    d: int,
    T: int,
    noise_std: float = 0.0,
    seed: int = 0,
) -> List[StreamRecord]:
    """Stationary stream: a fixed random kernel expansion plus noise.

    The target function is a 20-center kernel expansion with uniform
    [-1, 1] coefficients; features and noisy targets are min-max
    rescaled to [0, 1] afterwards.
    """
    X, f_vals, noise, _, _ = _stationary_parts(spec, d, T, noise_std, seed)
    return _to_records(minmax_normalize(X), minmax_normalize(f_vals + noise), Task.REGRESSION)


def save_csv(records: Sequence[StreamRecord], path) -> None:
    """Write records as ``t, x_1..x_d, y`` with a header row."""
    if not records:
        raise ValueError("cannot write an empty stream")
    d = records[0].x.shape[0]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"x_{i + 1}" for i in range(d)] + ["y"])
        for rec in records:
            writer.writerow([rec.t] + [repr(float(v)) for v in rec.x] + [repr(rec.y)])


def load_csv(
    path,
    label_column: str,
    feature_columns: Optional[Sequence[str]] = None,
    normalize: bool = True,
    task: Task = Task.REGRESSION,
) -> List[StreamRecord]:
    """Load a comma-separated stream with a header row, in file order.

    ``feature_columns`` defaults to every column except the label and a
    ``t`` column if present. Classification labels must be -1 or +1 and
    are never rescaled; regression labels follow the feature columns
    through min-max normalization.
    """
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file (header row required)")
        header = [h.strip() for h in header]
        rows = list(reader)

    if label_column not in header:
        raise DataFormatError(f"{path}: label column {label_column!r} not found")
    if feature_columns is None:
        feature_columns = [c for c in header if c not in (label_column, "t")]
    for col in feature_columns:
        if col not in header:
            raise DataFormatError(f"{path}: feature column {col!r} not found")
    if not feature_columns:
        raise DataFormatError(f"{path}: no feature columns")
    if not rows:
        raise DataFormatError(f"{path}: no data rows")

    idx = {c: header.index(c) for c in header}

    def parse(row_num, row, col):
        try:
            return float(row[idx[col]])
        except (ValueError, IndexError):
            cell = row[idx[col]] if idx[col] < len(row) else "<missing>"
            raise DataFormatError(
                f"{path}: row {row_num}, column {col!r}: non-numeric value {cell!r}"
            )

    X = np.empty((len(rows), len(feature_columns)))
    y = np.empty(len(rows))
    for i, row in enumerate(rows):
        row_num = i + 2  # 1-based, counting the header
        for j, col in enumerate(feature_columns):
            X[i, j] = parse(row_num, row, col)
        y[i] = parse(row_num, row, label_column)

    if task is Task.CLASSIFICATION:
        bad = np.nonzero(~np.isin(y, (-1.0, 1.0)))[0]
        if bad.size:
            raise DataFormatError(
                f"{path}: row {bad[0] + 2}, column {label_column!r}: "
                f"classification label must be -1 or +1, got {y[bad[0]]!r}"
            )
        if normalize:
            X = minmax_normalize(X)
    elif normalize:
        X = minmax_normalize(X)
        y = minmax_normalize(y)
    return _to_records(X, y, task)


def default_kernel_dictionary(input_dim: int) -> List[KernelSpec]:
    """Gaussian kernels with bandwidths {0.1, 1, 10}."""
    return [
        KernelSpec(KernelFamily.GAUSSIAN, bw, input_dim) for bw in (0.1, 1.0, 10.0)
    ]
