"""Model systems with focus-focus singularities and extraction of their invariant series."""

from .core import (
    JointTime,
    PhasePoint,
    RegularValue,
    hamiltonian_fields,
    momentum_map,
    normal_form_flow,
)
from .errors import NumericFailure, ValidationError
from .invariant import (
    InvariantReport,
    PeriodLatticeBasis,
    PeriodSample,
    SamplingOptions,
    eval_S_along_ray,
    fit_invariant,
    monodromy_matrix,
    multipinch_sigma_sum,
    regularize_sample,
    sample_grid,
    symmetry_check,
)
from .model import (
    ModelFoliation,
    ModelPoint,
    TransitionSeries,
    analytic_return_times,
    build_model,
    glue_map,
    model_flow,
    section_points,
)
from .series import TruncatedSeries2, series_eval, series_partials

__version__ = "0.1.0"
__all__ = [
    "JointTime", "PhasePoint", "RegularValue", "hamiltonian_fields", "momentum_map", "normal_form_flow",
    "NumericFailure", "ValidationError",
    "InvariantReport", "PeriodLatticeBasis", "PeriodSample", "SamplingOptions", "eval_S_along_ray",
    "fit_invariant", "monodromy_matrix", "multipinch_sigma_sum", "regularize_sample", "sample_grid",
    "symmetry_check",
    "ModelFoliation", "ModelPoint", "TransitionSeries", "analytic_return_times", "build_model", "glue_map",
    "model_flow", "section_points",
    "TruncatedSeries2", "series_eval", "series_partials",
]
