"""Exact counterfactual analysis of truncation-by-death problems.

The package evaluates finite structural causal models over every
configuration of their exogenous noise at once, so counterfactual
distributions, survivor effects, and conditional separable effects come
out as exact rational arithmetic on numpy arrays rather than Monte Carlo
approximations.  A battery of numeric audits decides when the observed
treatment-outcome association among event-free units carries a causal
reading, and seeded sampling plus plug-in estimation close the loop
against simulated data.
"""

from .audit import (
    AuditReport,
    CheckResult,
    CSE_GATE,
    SACE_GATE,
    STANDARDIZED_GATE,
    ResponseTypeTable,
    classify_response_types,
    run_all_audits,
)
from .errors import (
    CalibrationError,
    ColumnError,
    EmptyStratumError,
    Error,
    InvalidModelError,
    NoiseSpaceError,
    PositivityError,
    RoleError,
    ScenarioError,
    TruncatedOutcomeError,
)
from .estimands import (
    EstimandReport,
    NOT_COMPUTED,
    UNDEFINED_TRUNCATION,
    estimand_report,
    naive_contrast,
    true_ate,
    true_cse,
    true_sace,
)
from .identify import (
    FunctionalResult,
    PlugInEstimate,
    plug_in,
    prop1_functional,
    prop3_functional,
)
from .model import (
    FiniteVariable,
    Intervention,
    Mechanism,
    NoiseSpec,
    StructuralModel,
    ValidationReport,
    tabulate,
    validate_model,
)
from .sampling import (
    Dataset,
    dataset_from_csv,
    dataset_to_csv,
    sample_dataset,
)
from .scenario import dump_scenario, load_scenario, parse_scenario
from .worlds import (
    ENUMERATION_CAP,
    ObservedLaw,
    Table,
    UNDEFINED,
    WorldTable,
    conditional_mean,
    counterfactual_joint,
    event_probability,
    format_table,
    observed_law,
)
from .zoo import (
    CalibrationTargets,
    FIXTURE_NAMES,
    build_adherence,
    build_birthweight,
    build_fixture,
    build_pie,
    build_surgery,
    build_violation,
    build_with_l,
    calibration_moments,
    random_fig4_model,
    random_fig7_model,
    shared_threshold_noise,
)

__version__ = "0.1.0"

__all__ = [
    "AuditReport",
    "CalibrationError",
    "CalibrationTargets",
    "CheckResult",
    "ColumnError",
    "CSE_GATE",
    "Dataset",
    "EmptyStratumError",
    "ENUMERATION_CAP",
    "Error",
    "EstimandReport",
    "FIXTURE_NAMES",
    "FiniteVariable",
    "FunctionalResult",
    "Intervention",
    "InvalidModelError",
    "Mechanism",
    "NOT_COMPUTED",
    "NoiseSpaceError",
    "NoiseSpec",
    "ObservedLaw",
    "PlugInEstimate",
    "PositivityError",
    "ResponseTypeTable",
    "RoleError",
    "SACE_GATE",
    "STANDARDIZED_GATE",
    "ScenarioError",
    "StructuralModel",
    "Table",
    "TruncatedOutcomeError",
    "UNDEFINED",
    "UNDEFINED_TRUNCATION",
    "ValidationReport",
    "WorldTable",
    "build_adherence",
    "build_birthweight",
    "build_fixture",
    "build_pie",
    "build_surgery",
    "build_violation",
    "build_with_l",
    "calibration_moments",
    "classify_response_types",
    "conditional_mean",
    "counterfactual_joint",
    "dataset_from_csv",
    "dataset_to_csv",
    "dump_scenario",
    "estimand_report",
    "event_probability",
    "format_table",
    "load_scenario",
    "naive_contrast",
    "observed_law",
    "parse_scenario",
    "plug_in",
    "prop1_functional",
    "prop3_functional",
    "random_fig4_model",
    "random_fig7_model",
    "run_all_audits",
    "sample_dataset",
    "shared_threshold_noise",
    "tabulate",
    "true_ate",
    "true_cse",
    "true_sace",
    "validate_model",
]
