"""Differentially private count tables that preserve the distribution of counts.

A table of per-category counts is privatized in two stages: a noisy
distribution of counts ``z`` is released first, then every count passes
through a count mechanism ``T`` built so that ``z @ T == z``.
"""
from .baselines import (
    calibrate_sigma,
    default_gamma,
    discrete_gaussian_mechanism,
    staircase_mechanism,
    truncated_geometric_matrix,
)
from .constructors import (
    SELECTORS,
    ConstructorState,
    adjust_pattern,
    compute_q,
    heuristic_constructor,
    lp_fixed_point_constructor,
    lp_unfixed_constructor,
    select_column,
    unfixed_optimum_constructor,
)
from .core import (
    CountTable,
    PrivacyParam,
    apply_mechanism,
    distribution_of,
    histogram_of,
    in_F,
    in_U,
    is_extreme,
    neighbor_indistinguishable,
)
from .estimators import TwoStageCountPrivatizer
from .exceptions import (
    CapacityError,
    CountMechError,
    Infeasible,
    InputError,
    InvariantViolation,
    MembershipError,
    Unbounded,
)
from .lp import LPResult, solve_lp
from .metrics import all_distances, build_weight_matrix, count_error, distribution_distance
from .oracle import PolytopeDescriptor, enumerate_vertices, verify_representation_theorems
from .pipeline import PipelineConfig, PipelineReport, generate_synthetic, rule_of_thumb_split, run_two_stage
from .privatizers import classic_laplace, cyclic_gaussian, cyclic_laplace, project_to_simplex
from .scales import ScaleMatrix, enumerate_scales, scale_from_pattern

__version__ = "0.1.0"

__all__ = [
    "PrivacyParam", "CountTable", "histogram_of", "distribution_of", "apply_mechanism",
    "neighbor_indistinguishable", "in_U", "in_F", "is_extreme",
    "ScaleMatrix", "enumerate_scales", "scale_from_pattern",
    "cyclic_laplace", "classic_laplace", "cyclic_gaussian", "project_to_simplex",
    "SELECTORS", "ConstructorState", "compute_q", "adjust_pattern", "select_column",
    "heuristic_constructor", "lp_fixed_point_constructor", "lp_unfixed_constructor",
    "unfixed_optimum_constructor", "solve_lp", "LPResult",
    "truncated_geometric_matrix", "staircase_mechanism", "discrete_gaussian_mechanism",
    "calibrate_sigma", "default_gamma",
    "PolytopeDescriptor", "enumerate_vertices", "verify_representation_theorems",
    "distribution_distance", "all_distances", "build_weight_matrix", "count_error",
    "PipelineConfig", "PipelineReport", "run_two_stage", "rule_of_thumb_split", "generate_synthetic",
    "TwoStageCountPrivatizer",
    "CountMechError", "InputError", "CapacityError", "InvariantViolation", "MembershipError",
    "Infeasible", "Unbounded",
]
