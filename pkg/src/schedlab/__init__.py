"""Single-machine stochastic scheduling laboratory."""

from .analytics import (
    BoundNotApplicableError,
    cr_ftpp_exact,
    cr_ftpp_tilde_bracket,
    cr_ftpp_tilde_series,
    cr_ftpp_upper_2types,
    cr_ftpp_upper_Ktypes,
    excess_lower_bound,
    excess_upper_bound,
    expected_cost_ftpp,
    expected_cost_opt,
    expected_cost_rr,
    nonpreemptive_excess_decomposition,
)
from .core import (
    GENERATOR_NAME,
    GENERATOR_VERSION,
    EngineError,
    Instance,
    ParameterError,
    RunTrace,
    TypeParams,
    derive_seed,
    instance_from_csv,
    instance_to_csv,
    sample_instance,
)
from .engine import (
    Observation,
    inversion_counts,
    run_nonpreemptive,
    run_processor_sharing,
    run_slotted,
    trace_to_csv,
)
from .harness import (
    ConfigError,
    ExperimentConfig,
    ExperimentRecord,
    SummaryRow,
    aggregate,
    config_from_dict,
    config_from_json,
    run_experiment,
    write_records_csv,
    write_summary_csv,
)
from .policies import POLICY_NAMES, run_policy

__version__ = "0.1.0"

__all__ = [
    "BoundNotApplicableError",
    "ConfigError",
    "EngineError",
    "ExperimentConfig",
    "ExperimentRecord",
    "GENERATOR_NAME",
    "GENERATOR_VERSION",
    "Instance",
    "Observation",
    "POLICY_NAMES",
    "ParameterError",
    "RunTrace",
    "SummaryRow",
    "TypeParams",
    "aggregate",
    "config_from_dict",
    "config_from_json",
    "cr_ftpp_exact",
    "cr_ftpp_tilde_bracket",
    "cr_ftpp_tilde_series",
    "cr_ftpp_upper_2types",
    "cr_ftpp_upper_Ktypes",
    "derive_seed",
    "excess_lower_bound",
    "excess_upper_bound",
    "expected_cost_ftpp",
    "expected_cost_opt",
    "expected_cost_rr",
    "instance_from_csv",
    "instance_to_csv",
    "inversion_counts",
    "nonpreemptive_excess_decomposition",
    "run_experiment",
    "run_nonpreemptive",
    "run_policy",
    "run_processor_sharing",
    "run_slotted",
    "sample_instance",
    "trace_to_csv",
    "write_records_csv",
    "write_summary_csv",
    "__version__",
]
