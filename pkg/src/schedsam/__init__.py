"""Stochastically scheduled sharpness-aware optimization at desk scale.

Each update step flips a schedule-weighted coin between a plain gradient
step (one propagation) and an ascent-then-descent step (two
propagations), with exact accounting of the expected and realized cost,
plus flatness diagnostics for the minima the runs land in.
"""

from .errors import ConfigError, DimensionError, DivergenceError, EvaluationError
from .numeric import RngStream, axpy, bernoulli, central_diff_grad, l2_norm
from .objective import (
    Dataset,
    MinibatchSampler,
    MlpObjective,
    Objective,
    QuadraticObjective,
    TwoWellLandscape,
    WeightDecayObjective,
    dataset_from_csv,
    dataset_to_csv,
    make_dataset,
)
from .optimizer import (
    LrSchedule,
    OptimizerConfig,
    RunReport,
    StepRecord,
    compute_epsilon,
    empirical_eta,
    lr_at,
    sam_step,
    sgd_step,
    ss_sam_run,
)
from .scheduler import (
    ConstantSchedule,
    EtaReport,
    LinearSchedule,
    PiecewiseSchedule,
    Schedule,
    TrigSchedule,
    eta_of_step,
    eta_report,
    eval_schedule,
    expected_eta_closed_form,
    expected_eta_exact,
    parse_schedule,
)
from .sharpness import (
    EigenEstimate,
    SharpnessReport,
    hessian_top_eigen,
    loss_slice,
    sharpness_proxy,
    sharpness_report,
)
from .harness import (
    AggregateReport,
    EtaTableRow,
    ExperimentConfig,
    SeedResult,
    build_objective,
    emit_schedule_plot,
    eta_table,
    evaluate,
    load_config,
    load_published_eta,
    load_schedule_list,
    parse_config,
    read_trace_csv,
    run_experiment,
    write_trace_csv,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateReport",
    "ConfigError",
    "ConstantSchedule",
    "Dataset",
    "DimensionError",
    "DivergenceError",
    "EigenEstimate",
    "EtaReport",
    "EtaTableRow",
    "EvaluationError",
    "ExperimentConfig",
    "LinearSchedule",
    "LrSchedule",
    "MinibatchSampler",
    "MlpObjective",
    "Objective",
    "OptimizerConfig",
    "PiecewiseSchedule",
    "QuadraticObjective",
    "RngStream",
    "RunReport",
    "Schedule",
    "SeedResult",
    "SharpnessReport",
    "StepRecord",
    "TrigSchedule",
    "TwoWellLandscape",
    "WeightDecayObjective",
    "axpy",
    "bernoulli",
    "build_objective",
    "central_diff_grad",
    "compute_epsilon",
    "dataset_from_csv",
    "dataset_to_csv",
    "emit_schedule_plot",
    "empirical_eta",
    "eta_of_step",
    "eta_report",
    "eta_table",
    "eval_schedule",
    "evaluate",
    "expected_eta_closed_form",
    "expected_eta_exact",
    "hessian_top_eigen",
    "l2_norm",
    "load_config",
    "load_published_eta",
    "load_schedule_list",
    "loss_slice",
    "lr_at",
    "make_dataset",
    "parse_config",
    "parse_schedule",
    "read_trace_csv",
    "run_experiment",
    "sam_step",
    "sgd_step",
    "sharpness_proxy",
    "sharpness_report",
    "ss_sam_run",
    "write_trace_csv",
]
