"""Catalytic equation toolkit.

Parse a functional equation with one catalytic variable, compute the
exact power-series solution, classify it, and run the matching singular
analysis: kernel method for linear equations, the three-function
singular system for nonlinear ones, plus central-limit statistics for
marked parameters.
"""

from .errors import (
    AnalysisError,
    FitUnstableError,
    NegativeCoordinateError,
    NoConvergenceError,
    NonWellFoundedError,
    NotApplicableError,
    ParseError,
    StencilInconsistentError,
    TruncationUnstableError,
    UnknownEntryError,
    Y1NonzeroError,
)
from .poly import MultiPoly
from .series import (
    BiSeries,
    UniSeries,
    divided_difference,
    eval_numeric,
    series_add,
    series_div,
    series_mul,
    shift_u,
)
from .model import (
    CatalyticEquation,
    Classification,
    LinearDecomposition,
    classify,
    dependency_digraph,
    linear_decomposition,
    parse_equation,
    partial,
)
from .engine import (
    SolutionSeries,
    eval_u1,
    m0_certified,
    solve_series,
    solve_series_marked,
    u1_series,
)
from .linear import (
    KernelSolution,
    LinearSingularData,
    kernel_identity_check,
    kernel_solve,
    linear_asymptotics,
    linear_critical_point,
)
from .nonlinear import (
    AsymptoticForm,
    CriticalPoint,
    NonlinearSystem,
    PuiseuxExpansion,
    critical_point,
    derive_system,
    jacobian_at,
    newton_critical,
    nonlinear_asymptotics,
    puiseux_expansion,
    system_m0,
    system_series,
)
from .clt import (
    CltReport,
    RhoDerivatives,
    clt,
    exact_moments,
    rho_derivatives,
    rho_of_x,
)
from .corpus import (
    CorpusEntry,
    ValidationReport,
    list_entries,
    load,
    validate,
)

__version__ = "0.1.0"
