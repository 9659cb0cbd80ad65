"""Parameter sweeps behind the norm, convergence and optimal-truncation curves."""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass

from mpmath import mp, mpf

from .errors import ContractError
from .oracle import airy_initial_data, oracle_grid, reference_for, sup_error
from .truncation import oracle_optimal_N
from .wkb import IVProblem, PhaseTable, truncation_family

K2_REFERENCE = mpf(10) / 37


@dataclass(frozen=True)
class ProblemSpec:
    """Everything except eps that defines an IVP; picklable for worker pools.

    With ``airy_ic`` the initial data are Ai + i Bi at xi (requires a = x);
    otherwise ``phi0``/``phi1`` are used for every eps.
    """

    a: str
    interval: tuple
    phi0: object = None
    phi1: object = None
    airy_ic: bool = False
    oracle: str = "auto"
    tol: object = None

    def problem(self, eps) -> IVProblem:
        if self.airy_ic:
            phi0, phi1 = airy_initial_data(eps, self.interval[0])
        else:
            if self.phi0 is None or self.phi1 is None:
                raise ContractError("initial data phi0/phi1 are required without airy_ic")
            phi0, phi1 = self.phi0, self.phi1
        return IVProblem(self.a, self.interval, eps, phi0, phi1)


def airy_spec(interval=(1, 2)) -> ProblemSpec:
    return ProblemSpec("x", tuple(interval), airy_ic=True, oracle="airy")


def envelope(eps):
    """1/(5 eps^2) exp(-6/(5 eps)), the reference optimal-error curve for the Airy test."""
    eps = mpf(eps)
    return mp.exp(-6 / (5 * eps)) / (5 * eps**2)


def norm_bound(n, K2=K2_REFERENCE):
    """sqrt(3) K2^n n^n (with 0^0 = 1)."""
    return mp.sqrt(3) * K2**n * (mpf(n) ** n if n else 1)


def geometric_sweep(start, stop, count):
    """``count`` geometrically spaced values from ``start`` down to ``stop``."""
    start, stop = mpf(start), mpf(stop)
    if count < 2:
        raise ContractError("a sweep needs at least two values")
    if not start > stop > 0:
        raise ContractError("sweep values must be positive and strictly decreasing")
    ratio = (stop / start) ** (mpf(1) / (count - 1))
    values = [start * ratio**k for k in range(count)]
    values[-1] = stop
    return values


def loglog_slope(xs, ys):
    """Least-squares slope of log(y) against log(x)."""
    lx = [mp.log(x) for x in xs]
    ly = [mp.log(y) for y in ys]
    return _slope(lx, ly)


def _slope(xs, ys):
    n = len(xs)
    mx, my = mp.fsum(xs) / n, mp.fsum(ys) / n
    sxx = mp.fsum((x - mx) ** 2 for x in xs)
    return mp.fsum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sxx


def log_error_vs_inverse_eps_slope(eps_values, errors):
    """Slope of log(err) against 1/eps (negative for exponentially small errors)."""
    return _slope([1 / mpf(e) for e in eps_values], [mp.log(err) for err in errors])


def norm_rows(table: PhaseTable, K2=K2_REFERENCE):
    """(n, ||S_n'||, sqrt(3) K2^n n^n) for n = 0..N_max."""
    return [(n, norm, norm_bound(n, K2)) for n, norm in enumerate(table.sup_norms)]


# worker-pool plumbing: every task needs the same table; ship it once per worker
_WORKER = {}


def _init_worker(table, spec, grid_points, dps):
    mp.dps = dps
    _WORKER.update(table=table, spec=spec, grid_points=grid_points)


def _reference(spec, problem, grid_points):
    points = oracle_grid(problem.interval, grid_points)
    return reference_for(problem, points, spec.oracle, spec.tol)


def _sweep_one(table, spec, grid_points, eps, N_values):
    problem = spec.problem(eps)
    ref = _reference(spec, problem, grid_points)
    family = truncation_family(table, problem.eps, problem.phi0, problem.phi1, ref.points, N_values)
    return [(problem.eps, N, mp.inf if family[N] is None else sup_error(family[N], ref)) for N in N_values]


def _nopt_one(table, spec, grid_points, eps):
    problem = spec.problem(eps)
    ref = _reference(spec, problem, grid_points)
    report = oracle_optimal_N(problem, table, ref)
    return (problem.eps, report.N_selected, report.best_score, envelope(problem.eps), report)


def _sweep_task(args):
    eps, N_values = args
    w = _WORKER
    return _sweep_one(w["table"], w["spec"], w["grid_points"], eps, N_values)


def _nopt_task(eps):
    w = _WORKER
    return _nopt_one(w["table"], w["spec"], w["grid_points"], eps)


def _run(tasks, serial, pooled, table, spec, grid_points, workers):
    if workers <= 1:
        return [serial(t) for t in tasks]
    with concurrent.futures.ProcessPoolExecutor(
        workers, initializer=_init_worker, initargs=(table, spec, grid_points, mp.dps)
    ) as pool:
        # map preserves task order, so output order never depends on timing
        return list(pool.map(pooled, tasks))


def sweep_epsilon(table, spec: ProblemSpec, eps_values, N_values, grid_points=257, workers=1):
    """Rows ``(eps, N, sup_error)`` for every eps (in the given order) and N."""
    N_values = sorted(set(int(n) for n in N_values))
    if N_values[-1] > table.N_max:
        raise ContractError(f"N={N_values[-1]} exceeds the table's N_max={table.N_max}")
    tasks = [(mpf(e), N_values) for e in eps_values]
    chunks = _run(
        tasks,
        lambda t: _sweep_one(table, spec, grid_points, *t),
        _sweep_task,
        table,
        spec,
        grid_points,
        workers,
    )
    return [row for chunk in chunks for row in chunk]


def optimal_truncation_sweep(table, spec: ProblemSpec, eps_values, grid_points=257, workers=1):
    """Rows ``(eps, N_opt, optimal_error, envelope, report)`` per eps."""
    tasks = [mpf(e) for e in eps_values]
    return _run(
        tasks,
        lambda e: _nopt_one(table, spec, grid_points, e),
        _nopt_task,
        table,
        spec,
        grid_points,
        workers,
    )
