"""Gradient descent with proportional updates: per-block trust-ratio
optimizers (LARS, PercentDelta), executable convergence certificates, and a
convex benchmark harness with a CLI."""

from .core import (
    ConfigurationError,
    DataError,
    NumericsError,
    ParamBlock,
    TrajectoryRecord,
    block_view,
    norm,
    single_block,
)
from .objectives import (
    ConvexityInfo,
    Dataset,
    Objective,
    convex_1d_power,
    load_csv_dataset,
    logistic_regression,
    make_blobs_dataset,
    make_separable_dataset,
    numeric_gradient,
    quadratic_1d,
    quadratic_nd,
    svm_hinge,
)
from .optimizers import (
    Method,
    OptimizerConfig,
    OptimizerState,
    StepReport,
    StoppingRule,
    adam_step,
    apply_step,
    gd_step,
    iterate_values,
    lars_step,
    momentum_step,
    percent_delta_step,
    run,
)
from .schedules import Schedule, ScheduleKind, SeriesClass, robbins_monro_class
from .theory import (
    AlignmentProbe,
    Certificate,
    Comparator,
    RateChoice,
    RunBounds,
    absorbing_interval,
    alignment_cosine,
    alignment_floor_probe,
    decay_gap_bound,
    fixed_rate_constants,
    fixed_rate_gap_bound,
    hitting_time,
    max_rate_for_tolerance,
    measure_run_bounds,
    origin_trap_iterate,
    rate_for_accuracy,
    safe_rate_threshold,
    step_increases_distance,
)

__version__ = "0.1.0"
