"""Choosing the truncation order N.

Two selectors share one report type:

* ``least-term``: a-priori; N minimises eps^n * ||S_n'||, the classical
  smallest-term rule for a divergent asymptotic series.
* ``oracle``: a-posteriori; N minimises the measured sup-error against a
  reference solution.

Ties go to the smaller N (cheaper at equal quality).
"""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import mp, mpf

from .errors import ContractError, DegenerateFitError, TruncationBoundaryError
from .oracle import OracleSolution, sup_error
from .wkb import PhaseTable, truncation_family

LEAST_TERM = "least-term"
ORACLE = "oracle"


@dataclass(frozen=True)
class TruncationReport:
    eps: object
    N_selected: int
    scores: tuple
    mode: str
    at_boundary: bool = False
    floor: object = None

    @property
    def best_score(self):
        return self.scores[self.N_selected]


@dataclass(frozen=True)
class NormGrowthFit:
    """``log ||S_n'|| ~ log(prefactor) + n log(K2) + n log(n)`` for n >= 2."""

    K2: object
    prefactor: object
    residuals: dict

    def bound(self, n):
        return self.prefactor * self.K2**n * (mpf(n) ** n if n else 1)


def _argmin(scores):
    best = 0
    for n, s in enumerate(scores):
        if s < scores[best]:
            best = n
    return best


def least_term_N(table: PhaseTable, eps, *, strict: bool = False) -> TruncationReport:
    """N = argmin_n eps^n ||S_n'||_inf over 0..N_max."""
    if table.N_max < 2:
        raise ContractError("least-term selection needs N_max >= 2")
    eps = mpf(eps)
    scores = tuple(eps**n * norm for n, norm in enumerate(table.sup_norms))
    N = _argmin(scores)
    at_boundary = N == table.N_max
    if at_boundary and strict:
        raise TruncationBoundaryError(f"least term at N_max={table.N_max} for eps={mp.nstr(eps, 6)}; N_max too small")
    return TruncationReport(eps, N, scores, LEAST_TERM, at_boundary)


def error_curve(problem, table: PhaseTable, reference: OracleSolution, N_max=None):
    """Sup-error of phi_N^WKB on the reference grid for N = 0..N_max.

    Orders whose exponent overflows get an infinite error.
    """
    N_max = table.N_max if N_max is None else N_max
    family = truncation_family(table, problem.eps, problem.phi0, problem.phi1, reference.points, range(N_max + 1))
    return tuple(mp.inf if family[N] is None else sup_error(family[N], reference) for N in range(N_max + 1))


def oracle_optimal_N(problem, table: PhaseTable, reference: OracleSolution, N_max=None) -> TruncationReport:
    """N minimising the measured error against ``reference``.

    Errors below the precision floor ``1e(6-P) * max(1, |phi0|, |phi1|)``
    count as equal, so a problem that WKB solves exactly selects N = 0.
    """
    errors = error_curve(problem, table, reference, N_max)
    floor = mpf(10) ** (6 - mp.dps) * max(mpf(1), abs(problem.phi0), abs(problem.phi1))
    N = _argmin([max(e, floor) for e in errors])
    return TruncationReport(problem.eps, N, errors, ORACLE, N == len(errors) - 1, floor)


def fit_norm_growth(table: PhaseTable, n_min: int = 2) -> NormGrowthFit:
    """Least-squares fit of the sup-norm growth law over n = n_min..N_max."""
    if table.N_max < 6:
        raise ContractError("fit_norm_growth needs N_max >= 6")
    pts = [(n, norm) for n, norm in enumerate(table.sup_norms) if n >= n_min and norm > 0]
    if len(pts) < 5:
        raise DegenerateFitError(f"only {len(pts)} nonzero norms for n >= {n_min}; cannot fit a growth law")
    ns = [mpf(n) for n, _ in pts]
    ys = [mp.log(norm) - n * mp.log(n) for n, norm in pts]
    count = len(ns)
    mean_n = mp.fsum(ns) / count
    mean_y = mp.fsum(ys) / count
    sxx = mp.fsum((n - mean_n) ** 2 for n in ns)
    sxy = mp.fsum((n - mean_n) * (y - mean_y) for n, y in zip(ns, ys))
    slope = sxy / sxx
    intercept = mean_y - slope * mean_n
    residuals = {int(n): y - (intercept + slope * n) for n, y in zip(ns, ys)}
    return NormGrowthFit(mp.exp(slope), mp.exp(intercept), residuals)
