"""regretlab: a noisy continuous-optimization laboratory.

Five classic black-box optimizers behind one ask/tell/recommend contract,
three regret metrics (simple regret of recommendations, running-minimum regret
of search points, and a windowed worst-case variant), and a seeded benchmark
harness that fits log-log convergence slopes.  The point of keeping search
points and recommendations separate everywhere is that the three metrics can
rank the same algorithm completely differently; the demos and the built-in
suite make those inconsistencies reproducible.
"""

from .problem import (
    EvaluationRecord,
    NoisyBlackBox,
    ProblemInstance,
    RunTrace,
    make_sphere_problem,
    noisy_eval,
    trace_append,
    true_value,
)
from .regret import (
    RegretConfig,
    RegretSeries,
    RsrStream,
    SlopeEstimate,
    asr,
    asr_stream,
    default_g,
    estimate_slope,
    rsr_from_values,
    rsr_oracle,
    rsr_stream,
    simple_regret,
    sr_series,
)
from .optimizers import (
    ESConfig,
    FabianConfig,
    FabianSA,
    OnePlusOneES,
    Optimizer,
    ProbeRecommendation,
    RandomSearch,
    RepeatSearchPoints,
    ResamplingSchedule,
    ShamirConfig,
    ShamirSGD,
    fabian_weights,
    wrap_probe_recommendation,
    wrap_repeat_g,
)
from .harness import (
    ExperimentSpec,
    ReplicateResult,
    RunResult,
    SuiteResult,
    acceptance_suite,
    aggregate_runs,
    fig1_suite,
    log_spaced_checkpoints,
    run_single,
    run_spec,
    run_suite,
)
from .config import ConfigError, parse_config, serialize_config
from .io import (
    read_regret_csv,
    slope_summary_from_csv,
    slope_summary_rows,
    write_regret_csv,
    write_slope_summary,
)
from .selfcheck import run_selfchecks

__version__ = "0.1.0"

__all__ = [
    "EvaluationRecord",
    "NoisyBlackBox",
    "ProblemInstance",
    "RunTrace",
    "make_sphere_problem",
    "noisy_eval",
    "trace_append",
    "true_value",
    "RegretConfig",
    "RegretSeries",
    "RsrStream",
    "SlopeEstimate",
    "asr",
    "asr_stream",
    "default_g",
    "estimate_slope",
    "rsr_from_values",
    "rsr_oracle",
    "rsr_stream",
    "simple_regret",
    "sr_series",
    "ESConfig",
    "FabianConfig",
    "FabianSA",
    "OnePlusOneES",
    "Optimizer",
    "ProbeRecommendation",
    "RandomSearch",
    "RepeatSearchPoints",
    "ResamplingSchedule",
    "ShamirConfig",
    "ShamirSGD",
    "fabian_weights",
    "wrap_probe_recommendation",
    "wrap_repeat_g",
    "ExperimentSpec",
    "ReplicateResult",
    "RunResult",
    "SuiteResult",
    "acceptance_suite",
    "aggregate_runs",
    "fig1_suite",
    "log_spaced_checkpoints",
    "run_single",
    "run_spec",
    "run_suite",
    "ConfigError",
    "parse_config",
    "serialize_config",
    "read_regret_csv",
    "slope_summary_from_csv",
    "slope_summary_rows",
    "write_regret_csv",
    "write_slope_summary",
    "run_selfchecks",
]
