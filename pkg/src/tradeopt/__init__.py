"""Utility/identifiability tradeoff toolkit for categorical event logs.

Pick which user attributes to reveal by maximizing predicted utility (bits of
intent entropy removed) minus a calibrated identifiability cost. Estimation
runs exactly or by seeded sampling, over empirical logs or generative models;
optimizers range from plain greedy to lazy local search with an online upper
bound; calibration converts survey-style sensitivity levels into bits.
"""

from .calibrate import (
    CalibrationResult,
    GranularityPoint,
    bits_from_speedup,
    fit_lambda,
    read_granularity_csv,
    read_levels_csv,
    read_scale_csv,
    sensitivity_to_bits,
)
from .errors import (
    EnumerationLimitError,
    InfeasibleBudgetError,
    LogFormatError,
    ModelSpecError,
    SchemaError,
    TradeoptError,
)
from .empirical import DEFAULT_SMOOTHING, EmpiricalJoint, SmoothingConfig
from .events import (
    EventLog,
    EventRecord,
    format_log,
    infer_schema,
    load_log,
    parse_log,
    pattern_bits,
    pattern_space,
    write_log,
)
from .fixtures import build_default_model, default_model, default_schema
from .kernels import active_backend, set_backend, use_backend
from .models import (
    JointModel,
    format_model,
    generate_synthetic,
    independent_model,
    load_model,
    parse_model,
    save_model,
)
from .objectives import (
    CostMetric,
    Evaluation,
    ObjectiveProvider,
    ObjectiveSpec,
    SamplingPlan,
    identifiability,
    objective,
    sample_size_cost,
    sample_size_utility,
    sensitivity_cost,
    utility,
)
from .optimize import (
    GreedyTrace,
    LlsConfig,
    Selection,
    TradeoffCurve,
    constrained_max_utility,
    exhaustive,
    greedy,
    lazy_greedy,
    lls,
    normalize_objective,
    online_bound,
    sweep_lambda,
)
from .schema import (
    NEVER_SHARE,
    AttributeDef,
    AttributeSchema,
    read_sensitivity_csv,
    sorted_subset,
    write_sensitivity_csv,
)

__version__ = "0.1.0"

__all__ = [
    "AttributeDef",
    "AttributeSchema",
    "CalibrationResult",
    "CostMetric",
    "DEFAULT_SMOOTHING",
    "EmpiricalJoint",
    "EnumerationLimitError",
    "EventLog",
    "EventRecord",
    "Evaluation",
    "GranularityPoint",
    "GreedyTrace",
    "InfeasibleBudgetError",
    "JointModel",
    "LlsConfig",
    "LogFormatError",
    "ModelSpecError",
    "NEVER_SHARE",
    "ObjectiveProvider",
    "ObjectiveSpec",
    "SamplingPlan",
    "SchemaError",
    "Selection",
    "SmoothingConfig",
    "TradeoffCurve",
    "TradeoptError",
    "active_backend",
    "bits_from_speedup",
    "build_default_model",
    "constrained_max_utility",
    "default_model",
    "default_schema",
    "exhaustive",
    "fit_lambda",
    "format_log",
    "format_model",
    "generate_synthetic",
    "greedy",
    "identifiability",
    "independent_model",
    "infer_schema",
    "lazy_greedy",
    "lls",
    "load_log",
    "load_model",
    "normalize_objective",
    "objective",
    "online_bound",
    "parse_log",
    "parse_model",
    "pattern_bits",
    "pattern_space",
    "read_granularity_csv",
    "read_levels_csv",
    "read_scale_csv",
    "read_sensitivity_csv",
    "sample_size_cost",
    "sample_size_utility",
    "save_model",
    "sensitivity_cost",
    "sensitivity_to_bits",
    "set_backend",
    "sorted_subset",
    "sweep_lambda",
    "use_backend",
    "utility",
    "write_log",
    "write_sensitivity_csv",
    "__version__",
]
