"""Quantitative bipolar argumentation: gradual semantics, counterfactual
explanations, polarity/priority analysis and Shapley attribution."""

from .attribution import AttributionReport, shapley_all, shapley_importance
from .core import ATTACK, SUPPORT, Qbaf, is_acyclic, load_qbaf, parse_qbaf, qbaf_from_dict, qbaf_to_dict, serialize_qbaf
from .counterfactual import (
    VARIANTS,
    CexQuery,
    CexResult,
    ProblemKind,
    SolverConfig,
    check_validity,
    difference_quotient,
    lp_distance,
    nullify,
    solve,
    solve_variant,
    trivial_counterfactual,
)
from .errors import (
    ConfigError,
    EmptyExperiment,
    NonConvergence,
    QbafError,
    QbafSyntaxError,
    SchemaError,
    SolverError,
    SweepLimit,
    TooLarge,
    Unreachable,
)
from .graph import (
    Connectivity,
    Polarity,
    connectivity,
    enumerate_simple_paths,
    find_elementary_cycles,
    polarity,
    polarity_map,
    priority,
    priority_map,
)
from .kernels import BACKEND
from .semantics import (
    DEFAULT_CONFIG,
    EvalConfig,
    Semantics,
    StrengthMap,
    evaluate,
    evaluate_restricted,
    residual,
    topic_strength,
)

__version__ = "0.1.0"
