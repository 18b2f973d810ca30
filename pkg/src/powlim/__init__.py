"""Nonintrusive parametric surrogates for limits of matrix-power algorithms.

Given an affinely parametrized family A(mu) = sum_l alpha_l(mu) A_l, the
package interpolates the tensor-power coefficient functions
g(k, mu) = prod_l alpha_l(mu)^{k_l} over the parameter box by a greedy
offline stage, then reuses the resulting weights lambda(mu) to combine exact
per-parameter quantities (linear-system solutions, full inverses,
log-determinants) into surrogates whose online cost is independent of the
matrix order. Baseline methods, validators for the underlying iteration
identities, and a benchmark harness round out the toolkit.
"""

from .baselines import (
    FrobeniusMin,
    PodBasis,
    PodGalerkin,
    PodKernelRidge,
    RidgeModel,
    pod_build,
    pod_solve,
    ridge_fit,
    ridge_predict,
)
from .bench import (
    BenchConfig,
    BenchReport,
    BenchRow,
    export_csv,
    rel_errors,
    run_convergence,
)
from .eim import EimInterpolant
from .expressions import CoeffExpr, ExpressionError, check_on_box, parse_expression
from .family import (
    AffineFamily,
    ParameterBox,
    load_family,
    monomial,
    monomial_matrix,
    save_family,
)
from .linalg import (
    DENSE_LIMIT,
    NumericalError,
    dense_inverse,
    gershgorin_upper,
    sparse_solve,
    spd_logdet,
    spectral_norm,
)
from .model_io import ModelFormatError, load_model, save_model
from .multi_index import (
    MultiIndexSet,
    count_fixed_weight,
    count_multi_indices,
    enumerate_multi_indices,
)
from .problems import PROBLEM_KINDS, generate_problem
from .sampling import (
    SampleSet,
    build_sample,
    explicit_sample,
    grid_sample,
    lhs_sample,
    load_doe_csv,
    maximin_lhs,
    save_doe_csv,
)
from .suite import CheckResult, validate_suite
from .surrogates import (
    Surrogate,
    exact_inverse,
    exact_logdet,
    exact_solve,
    load_surrogate,
)
from .validators import (
    LogDetSeriesConfig,
    PowerExpansion,
    RichardsonConfig,
    RichardsonResult,
    brute_power_expand,
    logdet_series,
    logdet_series_bound,
    power_interp_check,
    richardson_iterate,
    richardson_sampled_bound,
)

__version__ = "0.1.0"

__all__ = [
    "AffineFamily",
    "BenchConfig",
    "BenchReport",
    "BenchRow",
    "CheckResult",
    "CoeffExpr",
    "DENSE_LIMIT",
    "EimInterpolant",
    "ExpressionError",
    "FrobeniusMin",
    "LogDetSeriesConfig",
    "ModelFormatError",
    "MultiIndexSet",
    "NumericalError",
    "PROBLEM_KINDS",
    "ParameterBox",
    "PodBasis",
    "PodGalerkin",
    "PodKernelRidge",
    "PowerExpansion",
    "RichardsonConfig",
    "RichardsonResult",
    "RidgeModel",
    "SampleSet",
    "Surrogate",
    "brute_power_expand",
    "build_sample",
    "check_on_box",
    "count_fixed_weight",
    "count_multi_indices",
    "dense_inverse",
    "enumerate_multi_indices",
    "exact_inverse",
    "exact_logdet",
    "exact_solve",
    "explicit_sample",
    "export_csv",
    "generate_problem",
    "gershgorin_upper",
    "grid_sample",
    "lhs_sample",
    "load_doe_csv",
    "load_family",
    "load_model",
    "load_surrogate",
    "logdet_series",
    "logdet_series_bound",
    "maximin_lhs",
    "monomial",
    "monomial_matrix",
    "parse_expression",
    "pod_build",
    "pod_solve",
    "power_interp_check",
    "rel_errors",
    "richardson_iterate",
    "richardson_sampled_bound",
    "ridge_fit",
    "ridge_predict",
    "run_convergence",
    "save_doe_csv",
    "save_family",
    "save_model",
    "sparse_solve",
    "spd_logdet",
    "spectral_norm",
    "validate_suite",
]
