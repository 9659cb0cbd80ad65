"""High-precision WKB expansions for eps^2 phi'' + a(x) phi = 0 with optimal truncation."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ContractError,
    ExponentOverflowError,
    ExprDomainError,
    ExprSyntaxError,
    IllConditionedMatchingError,
    NonPositiveCoefficientError,
    NumericDomainError,
    ResolutionError,
    ResolutionWarning,
    TruncationBoundaryError,
    UsageError,
    WKBError,
)
from .jets import Jet, get_precision, precision, set_precision  # noqa: E402
from .expr import evaluate, eval_jet, parse, to_source  # noqa: E402
from .chebyshev import ChebGrid, ChebSeries, antiderivative, chebfit, integrate, sup_norm  # noqa: E402
from .wkb import (  # noqa: E402
    IVProblem,
    PhaseTable,
    WKBSolution,
    build_phase_table,
    evaluate_on_grid,
    evaluate_scaled_derivative,
    evaluate_wkb,
    solve,
    truncation_family,
)
from .oracle import airy_initial_data, airy_solution, integrate_ivp, reference_for, sup_error  # noqa: E402
from .truncation import TruncationReport, fit_norm_growth, least_term_N, oracle_optimal_N  # noqa: E402

__all__ = [n for n in dir() if not n.startswith("_") and n not in {"errors", "jets", "expr", "chebyshev", "wkb", "oracle", "truncation"}]
