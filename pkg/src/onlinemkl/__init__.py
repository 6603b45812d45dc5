"""Streaming multi-kernel learning with random features.

Online learners that combine a dictionary of shift-invariant kernels
through random feature maps: per-kernel gradient descent with
multiplicative kernel weighting (Raker), its interval-ensemble variant
for streams with unknown dynamics (AdaRaker), and exact-kernel
baselines, plus stream generation and regret evaluation.
"""

from .adaraker import AdaRaker, Interval, active_intervals
from .baselines import OMKL, ExactKernelLearner, SupportSet, exact_predict, exact_step
from .data import (
    PRESET_SCHEDULES,
    StreamRecord,
    SwitchingSchedule,
    Task,
    default_kernel_dictionary,
    gen_stationary_stream,
    gen_switching_stream,
    load_csv,
    minmax_normalize,
    save_csv,
)
from .evaluation import (
    RegretTrace,
    batch_exact_oracle,
    batch_rf_oracle,
    class_error,
    dynamic_regret_piecewise,
    error_curve,
    mse_curve,
    static_regret,
)
from .experiment import (
    ConfigError,
    ExperimentConfig,
    emit_regret_report,
    load_config,
    run_experiment,
)
from .features import (
    FeatureMap,
    FeatureVariant,
    KernelFamily,
    KernelSpec,
    derive_seed,
    exact_kernel,
    sample_spectral,
)
from .learners import KernelLearner
from .losses import LossKind, LossSpec, clip_unit, loss_gradient, loss_value
from .raker import Raker, SlotReport

__version__ = "0.1.0"

__all__ = [
    "AdaRaker",
    "ConfigError",
    "ExactKernelLearner",
    "ExperimentConfig",
    "FeatureMap",
    "FeatureVariant",
    "Interval",
    "KernelFamily",
    "KernelLearner",
    "KernelSpec",
    "LossKind",
    "LossSpec",
    "OMKL",
    "PRESET_SCHEDULES",
    "Raker",
    "RegretTrace",
    "SlotReport",
    "StreamRecord",
    "SupportSet",
    "SwitchingSchedule",
    "Task",
    "active_intervals",
    "batch_exact_oracle",
    "batch_rf_oracle",
    "class_error",
    "clip_unit",
    "default_kernel_dictionary",
    "derive_seed",
    "dynamic_regret_piecewise",
    "emit_regret_report",
    "error_curve",
    "exact_kernel",
    "exact_predict",
    "exact_step",
    "gen_stationary_stream",
    "gen_switching_stream",
    "load_config",
    "load_csv",
    "loss_gradient",
    "loss_value",
    "minmax_normalize",
    "mse_curve",
    "run_experiment",
    "sample_spectral",
    "save_csv",
    "static_regret",
]
