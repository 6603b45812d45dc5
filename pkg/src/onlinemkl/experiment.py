"""Experiment runner: JSON config -> online loop -> telemetry + summary.

Every algorithm sees the same immutable stream. The loop reads a
sample's features, fixes the prediction, and only then reads the label,
so telemetry reflects genuine online behavior. Telemetry CSVs are
byte-reproducible for a fixed config and seed; wall-clock timings go to
the summary file only.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import figures
from .adaraker import AdaRaker
from .baselines import OMKL, ExactKernelLearner
from .data import (
    PRESET_SCHEDULES,
    StreamRecord,
    SwitchingSchedule,
    Task,
    default_kernel_dictionary,
    gen_stationary_stream,
    gen_switching_stream,
    load_csv,
    save_csv,
)
from .evaluation import batch_rf_oracle, static_regret
from .features import FeatureVariant, KernelSpec, derive_seed, sample_spectral
from .learners import KernelLearner
from .losses import LossKind, LossSpec, loss_value
from .raker import Raker


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    stream: dict
    task: Task = Task.REGRESSION
    kernels: Optional[List[KernelSpec]] = None  # None -> default dictionary
    num_features: int = 50
    variant: FeatureVariant = FeatureVariant.RF
    algorithms: List[str] = field(default_factory=lambda: ["raker"])
    eta_theta: Optional[float] = None  # None -> 1/sqrt(T)
    eta_weight: float = 0.5
    eta0: float = 10.0
    lam: float = 0.01
    seed: int = 0
    output_dir: str = "out"

    def __post_init__(self):
        if isinstance(self.task, str):
            try:
                self.task = Task(self.task.lower())
            except ValueError:
                raise ConfigError(f"unknown task {self.task!r}")
        if isinstance(self.variant, str):
            try:
                self.variant = FeatureVariant(self.variant.lower())
            except ValueError:
                raise ConfigError(f"unknown variant {self.variant!r}")
        if not self.algorithms:
            raise ConfigError("at least one algorithm is required")
        for name in self.algorithms:
            _parse_algorithm_name(name)  # raises ConfigError on bad names
        for label, value in (
            ("eta_weight", self.eta_weight),
            ("eta0", self.eta0),
            ("num_features", self.num_features),
        ):
            if not (value > 0):
                raise ConfigError(f"{label} must be positive, got {value!r}")
        if self.eta_theta is not None and not (self.eta_theta > 0):
            raise ConfigError(f"eta_theta must be positive, got {self.eta_theta!r}")
        if self.lam < 0:
            raise ConfigError(f"lambda must be non-negative, got {self.lam!r}")
        if not isinstance(self.stream, dict) or "kind" not in self.stream:
            raise ConfigError("stream must be an object with a 'kind' field")

    @property
    def loss_kind(self) -> LossKind:
        return (
            LossKind.SQUARED_ERROR
            if self.task is Task.REGRESSION
            else LossKind.LOGISTIC
        )

    def loss_spec(self) -> LossSpec:
        return LossSpec(self.loss_kind, lam=self.lam)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})")
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    known = {
        "stream",
        "task",
        "kernels",
        "num_features",
        "variant",
        "algorithms",
        "eta_theta",
        "eta_weight",
        "eta0",
        "lambda",
        "seed",
        "output_dir",
    }
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    if "stream" not in raw:
        raise ConfigError("config requires a 'stream' object")
    kernels = None
    if raw.get("kernels") is not None:
        try:
            kernels = [
                KernelSpec(k["family"], float(k["bandwidth"]), int(k["input_dim"]))
                if "input_dim" in k
                else dict(k)  # input_dim filled from the stream later
                for k in raw["kernels"]
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid kernel entry: {exc}")
    cfg = ExperimentConfig(
        stream=raw["stream"],
        task=raw.get("task", "regression"),
        kernels=None,
        num_features=int(raw.get("num_features", 50)),
        variant=raw.get("variant", "rf"),
        algorithms=list(raw.get("algorithms", ["raker"])),
        eta_theta=raw.get("eta_theta"),
        eta_weight=float(raw.get("eta_weight", 0.5)),
        eta0=float(raw.get("eta0", 10.0)),
        lam=float(raw.get("lambda", 0.01)),
        seed=int(raw.get("seed", 0)),
        output_dir=str(raw.get("output_dir", "out")),
    )
    cfg.kernels = kernels  # raw entries resolved once the stream dim is known
    return cfg


def _parse_algorithm_name(name: str):
    """'raker' | 'adaraker' | 'single:<p>' | 'omkl' | 'omkl-b:<B>'."""
    if name in ("raker", "adaraker", "omkl"):
        return name, None
    if name.startswith("single:"):
        try:
            return "single", int(name.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad kernel index in {name!r}")
    if name.startswith("omkl-b:"):
        try:
            budget = int(name.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad budget in {name!r}")
        if budget < 1:
            raise ConfigError(f"budget must be positive in {name!r}")
        return "omkl-b", budget
    raise ConfigError(f"unknown algorithm {name!r}")


def build_stream(config: ExperimentConfig) -> List[StreamRecord]:
    src = config.stream
    kind = src.get("kind")
    try:
        if kind == "stationary":
            spec = KernelSpec(
                src.get("family", "gaussian"),
                float(src.get("bandwidth", 1.0)),
                int(src["d"]),
            )
            return gen_stationary_stream(
                spec,
                d=int(src["d"]),
                T=int(src["T"]),
                noise_std=float(src.get("noise_std", 0.0)),
                seed=config.seed,
            )
        if kind == "switching":
            if "preset" in src:
                preset = src["preset"]
                if preset not in PRESET_SCHEDULES:
                    raise ConfigError(
                        f"unknown preset {preset!r}; choose from "
                        f"{sorted(PRESET_SCHEDULES)}"
                    )
                schedule = PRESET_SCHEDULES[preset]
            else:
                schedule = SwitchingSchedule(tuple(map(tuple, src["segments"])))
            return gen_switching_stream(
                schedule,
                d=int(src.get("d", 10)),
                T=schedule.horizon,
                sigma_alpha=float(src.get("sigma_alpha", 0.01)),
                seed=config.seed,
            )
        if kind == "csv":
            return load_csv(
                src["path"],
                label_column=src["label_column"],
                feature_columns=src.get("feature_columns"),
                normalize=bool(src.get("normalize", True)),
                task=config.task,
            )
    except ConfigError:
        raise
    except FileNotFoundError as exc:
        raise ConfigError(f"stream file not found: {exc.filename}")
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid stream config: {exc}")
    raise ConfigError(f"unknown stream kind {kind!r}")


def stream_switch_points(config: ExperimentConfig) -> List[int]:
    src = config.stream
    if src.get("kind") != "switching":
        return []
    if "preset" in src:
        return PRESET_SCHEDULES[src["preset"]].switch_points
    return SwitchingSchedule(tuple(map(tuple, src["segments"]))).switch_points


def resolve_kernels(config: ExperimentConfig, input_dim: int) -> List[KernelSpec]:
    if config.kernels is None:
        return default_kernel_dictionary(input_dim)
    out = []
    for k in config.kernels:
        if isinstance(k, KernelSpec):
            if k.input_dim != input_dim:
                raise ConfigError(
                    f"kernel input_dim {k.input_dim} does not match stream dim {input_dim}"
                )
            out.append(k)
        else:
            try:
                out.append(KernelSpec(k["family"], float(k["bandwidth"]), input_dim))
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"invalid kernel entry {k!r}: {exc}")
    return out


class _SingleAdapter:
    """Uniform predict/update facade over one feature-space learner."""

    def __init__(self, learner: KernelLearner, loss: LossSpec):
        self.learner = learner
        self.loss = loss
        self.weight_labels = ()

    def predict(self, x) -> float:
        return self.learner.predict(x)

    def update(self, x, y):
        z = self.learner.feature_map.transform(x)
        pred = self.learner.predict_features(z)
        loss = loss_value(self.loss, pred, y, self.learner.theta_sq_norm())
        self.learner.step_features(z, y)
        return pred, loss, ()

    def state_size(self) -> int:
        return self.learner.state_size() + self.learner.feature_map.spectral_matrix.size


class _MixtureAdapter:
    """Facade over Raker / OMKL, exposing normalized weights."""

    def __init__(self, algo):
        self.algo = algo
        self.weight_labels = algo.kernel_labels

    def predict(self, x) -> float:
        return self.algo.predict(x)[0]

    def update(self, x, y):
        report = self.algo.update(x, y)
        return report.prediction, report.combined_loss, tuple(report.normalized_weights)

    def state_size(self) -> int:
        return self.algo.state_size()


class _AdaRakerAdapter:
    def __init__(self, algo: AdaRaker):
        self.algo = algo
        self.weight_labels = ("active_intervals",)

    def predict(self, x) -> float:
        return self.algo.predict(x)[0]

    def update(self, x, y):
        report = self.algo.update(x, y)
        inventory = ";".join(
            f"{label}:{repr(float(w))}"
            for label, w in zip(report.labels, report.normalized_weights)
        )
        return report.prediction, report.combined_loss, (inventory,)

    def state_size(self) -> int:
        return self.algo.state_size()


def make_algorithm(
    name: str,
    config: ExperimentConfig,
    kernels: Sequence[KernelSpec],
    horizon: int,
):
    kind, arg = _parse_algorithm_name(name)
    loss = config.loss_spec()
    eta_theta = (
        config.eta_theta if config.eta_theta is not None else 1.0 / math.sqrt(horizon)
    )
    if kind == "raker":
        return _MixtureAdapter(
            Raker.create(
                kernels,
                config.num_features,
                config.variant,
                eta_theta,
                config.eta_weight,
                loss,
                seed=config.seed,
            )
        )
    if kind == "adaraker":
        return _AdaRakerAdapter(
            AdaRaker.create(
                kernels,
                config.num_features,
                config.variant,
                loss,
                seed=config.seed,
                eta0=config.eta0,
            )
        )
    if kind == "single":
        if not (0 <= arg < len(kernels)):
            raise ConfigError(
                f"single:{arg} out of range for {len(kernels)} kernels"
            )
        fm = sample_spectral(
            kernels[arg], config.num_features, config.variant, derive_seed(config.seed, arg)
        )
        return _SingleAdapter(KernelLearner(fm, eta_theta, loss), loss)
    if kind == "omkl":
        return _MixtureAdapter(OMKL(kernels, eta_theta, config.eta_weight, loss))
    if kind == "omkl-b":
        return _MixtureAdapter(
            OMKL(kernels, eta_theta, config.eta_weight, loss, budget=arg)
        )
    raise ConfigError(f"unknown algorithm {name!r}")  # unreachable


@dataclass
class AlgorithmRun:
    name: str
    predictions: np.ndarray
    losses: np.ndarray
    metric_curve: np.ndarray  # running MSE or classification error
    weight_rows: List[tuple]
    weight_labels: tuple
    wall_seconds: float
    step_seconds: List[float]
    peak_state_floats: int

    @property
    def final_metric(self) -> float:
        return float(self.metric_curve[-1])


def run_online(algo, records: Sequence[StreamRecord], task: Task, name: str = "") -> AlgorithmRun:
    """Drive one algorithm over the stream, prediction before label."""
    n = len(records)
    preds = np.empty(n)
    losses = np.empty(n)
    metric = np.empty(n)
    weight_rows = []
    step_seconds = []
    sq_sum = 0.0
    miss_sum = 0.0
    peak_state = 0
    t_start = time.perf_counter()
    for i, rec in enumerate(records):
        tic = time.perf_counter()
        x = rec.x
        yhat = algo.predict(x)
        y = rec.y
        try:
            pred, loss, weights = algo.update(x, y)
        except FloatingPointError as exc:
            raise RuntimeError(f"algorithm {name or algo!r} failed at slot {i + 1}: {exc}")
        step_seconds.append(time.perf_counter() - tic)
        preds[i] = yhat
        losses[i] = loss
        if task is Task.REGRESSION:
            sq_sum += (y - yhat) ** 2
            metric[i] = sq_sum / (i + 1)
        else:
            miss_sum += 1.0 if y * yhat <= 0 else 0.0
            metric[i] = miss_sum / (i + 1)
        weight_rows.append(weights)
        peak_state = max(peak_state, algo.state_size())
    wall = time.perf_counter() - t_start
    return AlgorithmRun(
        name=name,
        predictions=preds,
        losses=losses,
        metric_curve=metric,
        weight_rows=weight_rows,
        weight_labels=algo.weight_labels,
        wall_seconds=wall,
        step_seconds=step_seconds,
        peak_state_floats=peak_state,
    )


def _fmt(v) -> str:
    return repr(float(v))


def _slug(name: str) -> str:
    return name.replace(":", "_")


def write_telemetry(run: AlgorithmRun, records, task: Task, path) -> None:
    metric_name = "cum_mse" if task is Task.REGRESSION else "cum_err"
    if run.weight_labels == ("active_intervals",):
        weight_cols = ["active_intervals"]
    else:
        weight_cols = [f"w_{j + 1}" for j in range(len(run.weight_labels))]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "y", "yhat", "loss", metric_name] + weight_cols)
        for i, rec in enumerate(records):
            row = [
                rec.t,
                _fmt(rec.y),
                _fmt(run.predictions[i]),
                _fmt(run.losses[i]),
                _fmt(run.metric_curve[i]),
            ]
            weights = run.weight_rows[i]
            if run.weight_labels == ("active_intervals",):
                row.extend(weights)
            else:
                row.extend(_fmt(w) for w in weights)
            writer.writerow(row)


def run_experiment(
    config: ExperimentConfig,
    out_dir=None,
    render_figures: bool = True,
) -> List[dict]:
    """Run every configured algorithm; write telemetry, summary, figures.

    Returns the summary rows (one dict per algorithm).
    """
    out = Path(out_dir if out_dir is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = build_stream(config)
    kernels = resolve_kernels(config, records[0].x.shape[0])
    horizon = len(records)

    summary = []
    curves = {}
    for name in config.algorithms:
        algo = make_algorithm(name, config, kernels, horizon)
        run = run_online(algo, records, config.task, name)
        write_telemetry(run, records, config.task, out / f"telemetry_{_slug(name)}.csv")
        if render_figures and run.weight_labels and run.weight_labels != ("active_intervals",):
            weights = np.array([list(map(float, w)) for w in run.weight_rows])
            figures.save_weight_trajectories(
                weights,
                run.weight_labels,
                out / f"weights_{_slug(name)}.png",
                f"kernel weights: {name}",
            )
        curves[name] = run.metric_curve
        summary.append(
            {
                "algorithm": name,
                "task": config.task.value,
                "T": horizon,
                "final_metric": run.final_metric,
                "wall_seconds": run.wall_seconds,
                "median_step_ms": 1e3 * float(np.median(run.step_seconds)),
                "peak_state_floats": run.peak_state_floats,
            }
        )

    with open(out / "summary.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(summary[0].keys()))
        writer.writeheader()
        writer.writerows(summary)
    if render_figures:
        metric_name = "MSE(t)" if config.task is Task.REGRESSION else "error(t)"
        figures.save_metric_curves(curves, out / "metric_curves.png", metric_name)
    return summary


def emit_regret_report(
    config: ExperimentConfig,
    algorithm: str,
    out_dir=None,
    render_figures: bool = True,
):
    """Run one algorithm and write its regret trace against the batch
    feature-space comparator. Squared-error tasks only."""
    if config.task is not Task.REGRESSION:
        raise ConfigError("regret reports require the regression task")
    out = Path(out_dir if out_dir is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = build_stream(config)
    kernels = resolve_kernels(config, records[0].x.shape[0])
    horizon = len(records)

    algo = make_algorithm(algorithm, config, kernels, horizon)
    run = run_online(algo, records, config.task, algorithm)

    maps = [
        sample_spectral(spec, config.num_features, config.variant, derive_seed(config.seed, p))
        for p, spec in enumerate(kernels)
    ]
    oracle = batch_rf_oracle(records, maps, config.lam)
    trace = static_regret(run.losses, oracle.per_slot_losses)

    path = out / f"regret_{_slug(algorithm)}.csv"
    checkpoint_ts = {t for t, _ in trace.checkpoints}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["t", "cum_algo_loss", "cum_oracle_loss", "regret", "regret_over_sqrt_t", "checkpoint"]
        )
        for t, cum_a, cum_o, reg, reg_sqrt in trace.rows():
            writer.writerow(
                [t, _fmt(cum_a), _fmt(cum_o), _fmt(reg), _fmt(reg_sqrt), int(t in checkpoint_ts)]
            )
    if render_figures:
        figures.save_regret_trace(
            trace, out / f"regret_{_slug(algorithm)}.png", f"static regret: {algorithm}"
        )
    return trace, path


def write_synthetic_stream(config: ExperimentConfig, out_dir=None):
    """Materialize the configured stream as a CSV (the 'synth' command)."""
    out = Path(out_dir if out_dir is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = build_stream(config)
    path = out / "stream.csv"
    save_csv(records, path)
    return path
