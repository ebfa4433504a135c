"""Generalized Szász–Mirakjan–Durrmeyer operators.

A library and CLI workbench for the operator family indexed by an integer
parameter j: numerically stable evaluation of the operator images and their
derivatives, exact closed-form moments and central moments, the associated
differential-operator calculus with asymptotic-expansion coefficients, and an
experiment harness for convergence rates, expansion orders, and localization
decay.

The hot kernels run on a compiled Cython core when available and fall back to
a pure NumPy implementation (see szmd._backend; override with SZMD_BACKEND).
"""

from ._backend import available_backends, backend_name, set_backend
from .diffop import (
    ExpansionTerm,
    Polynomial,
    apply_dj2,
    apply_dj2k,
    differentiate_poly,
    expansion_coefficient,
    expansion_coefficient_poly,
    simultaneous_coefficient,
)
from .errors import (
    ArityError,
    DegenerateFitError,
    DomainError,
    EvalDomainError,
    ExpressionSyntaxError,
    GrowthPreconditionError,
    NonDifferentiableError,
    QuadratureConvergenceError,
    SzmdError,
    UnknownIdentifierError,
)
from .experiments import (
    ExperimentReport,
    FitResult,
    ModulusEstimate,
    ReportRow,
    converge_report,
    estimate_modulus,
    geometric_grid,
    localization_probe,
    order_fit,
    voronovskaja_fit,
)
from .fexpr import (
    FunctionSpec,
    differentiate,
    eval_expr,
    excised_function,
    exp_growth_function,
    expression_function,
    parse,
    polynomial_function,
    to_string,
)
from .moments import (
    CentralMomentSplit,
    OperatorParams,
    central_moment,
    central_moment_bounds,
    moment,
    moment_correction,
)
from .numerics import (
    BasisPoint,
    TailBound,
    binomial,
    falling_factorial,
    log_basis,
    log_poisson_pmf,
    poisson_head_bound,
    poisson_tail_bound,
)
from .operators import (
    EvalResult,
    QuadratureConfig,
    SeriesTruncation,
    evaluate,
    evaluate_batch,
    evaluate_derivative,
    inner_integral,
    truncation_window,
)

__version__ = "0.1.0"

__all__ = [
    "ArityError",
    "BasisPoint",
    "CentralMomentSplit",
    "DegenerateFitError",
    "DomainError",
    "EvalDomainError",
    "EvalResult",
    "ExpansionTerm",
    "ExperimentReport",
    "ExpressionSyntaxError",
    "FitResult",
    "FunctionSpec",
    "GrowthPreconditionError",
    "ModulusEstimate",
    "NonDifferentiableError",
    "OperatorParams",
    "Polynomial",
    "QuadratureConfig",
    "QuadratureConvergenceError",
    "ReportRow",
    "SeriesTruncation",
    "SzmdError",
    "TailBound",
    "UnknownIdentifierError",
    "apply_dj2",
    "apply_dj2k",
    "available_backends",
    "backend_name",
    "binomial",
    "central_moment",
    "central_moment_bounds",
    "converge_report",
    "differentiate",
    "differentiate_poly",
    "estimate_modulus",
    "eval_expr",
    "evaluate",
    "evaluate_batch",
    "evaluate_derivative",
    "excised_function",
    "exp_growth_function",
    "expansion_coefficient",
    "expansion_coefficient_poly",
    "expression_function",
    "falling_factorial",
    "geometric_grid",
    "inner_integral",
    "localization_probe",
    "log_basis",
    "log_poisson_pmf",
    "moment",
    "moment_correction",
    "order_fit",
    "parse",
    "poisson_head_bound",
    "poisson_tail_bound",
    "polynomial_function",
    "set_backend",
    "simultaneous_coefficient",
    "to_string",
    "truncation_window",
    "voronovskaja_fit",
]
