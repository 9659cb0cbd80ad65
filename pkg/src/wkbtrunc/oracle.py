"""Reference solutions used to measure WKB errors.

Three sources of ground truth:

* ``airy``: the Airy test problem a(x) = x, whose exact solution is
  Ai(-x eps^(-2/3)) + i Bi(-x eps^(-2/3)).  Ai/Bi come from their Maclaurin
  series evaluated with enough guard digits to absorb the cancellation.
* ``plane-wave``: closed form for constant a.
* ``ode``: a fixed-step Taylor-series integrator (explicit, one-step, order
  ``order`` >= 8) for arbitrary coefficients, refined by step halving.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from mpmath import mp, mpf, mpc

from .chebyshev import ChebGrid
from .errors import ContractError, NumericDomainError, OracleError
from .expr import Var, eval_jet, evaluate, is_constant

AIRY_T_MAX = 40
DEFAULT_GRID_POINTS = 257
DEFAULT_TAYLOR_ORDER = 24


@dataclass(frozen=True)
class OracleSolution:
    points: tuple
    phi: tuple
    eps_dphi: tuple
    tolerance: object
    method: str


def oracle_grid(interval, n_points: int = DEFAULT_GRID_POINTS):
    """Chebyshev-distributed evaluation points, ascending from xi to eta."""
    if n_points < 2:
        raise ContractError("an evaluation grid needs at least two points")
    return tuple(reversed(ChebGrid(interval[0], interval[1], n_points - 1).nodes))


def _airy_series(t, dps):
    """Maclaurin sums for (Ai, Bi, Ai', Bi') at ``dps`` digits."""
    with mp.workdps(dps):
        t = mpf(t)
        t3 = t**3
        eps = mpf(10) ** (-dps)
        # f = sum f_m t^(3m), g = sum g_m t^(3m+1)
        f = fd = g = gd = mpf(0)
        fm = mpf(1)
        gm = mpf(1)
        tp = mpf(1)  # t^(3m)
        tp_prev = mpf(0)  # t^(3m-3)
        t2 = t * t
        m = 0
        while True:
            f_term = fm * tp
            g_term = gm * tp * t
            f += f_term
            g += g_term
            gd += (3 * m + 1) * gm * tp
            if m:
                fd += 3 * m * fm * t2 * tp_prev
            scale = max(abs(f), abs(g), abs(fd), abs(gd), mpf(1))
            if m > 2 and max(abs(f_term), abs(g_term)) * (1 + abs(t)) < eps * scale and 3 * m > abs(t) ** 1.5:
                break
            fm = fm / ((3 * m + 3) * (3 * m + 2))
            gm = gm / ((3 * m + 4) * (3 * m + 3))
            tp_prev = tp
            tp *= t3
            m += 1
        gamma23 = mp.gamma(mpf(2) / 3)
        gamma13 = mp.gamma(mpf(1) / 3)
        c1 = 1 / (mp.cbrt(9) * gamma23)  # Ai(0)
        c2 = 1 / (mp.cbrt(3) * gamma13)  # -Ai'(0)
        s3 = mp.sqrt(3)
        ai = c1 * f - c2 * g
        bi = s3 * (c1 * f + c2 * g)
        aip = c1 * fd - c2 * gd
        bip = s3 * (c1 * fd + c2 * gd)
        return ai, bi, aip, bip


def _guard_digits(t):
    # largest series term ~ exp(2/3 |t|^(3/2)) cancels down to O(1)
    return int(math.ceil(2 / 3 * abs(float(t)) ** 1.5 / math.log(10))) + 10


def airy_pair(t, t_max=AIRY_T_MAX):
    """(Ai(t), Bi(t), Ai'(t), Bi'(t)) for t <= 0 at working precision.

    The series is summed at two guard levels and accepted once both agree to
    the working precision; the guard grows until they do.
    """
    t = mpf(t)
    if t > 0:
        raise ContractError(f"airy_pair is restricted to t <= 0, got {t}")
    if abs(t) > t_max:
        raise NumericDomainError(f"|t|={mp.nstr(abs(t), 5)} exceeds T_max={t_max}; cancellation would destroy the series")
    dps = mp.dps
    guard = _guard_digits(t)
    for _ in range(6):
        low = _airy_series(t, dps + guard)
        high = _airy_series(t, dps + guard + 15)
        scale = max(abs(v) for v in high)
        if max(abs(a - b) for a, b in zip(low, high)) <= scale * mpf(10) ** (-dps - 1):
            return tuple(+v for v in high)
        guard *= 2
    raise OracleError(f"Airy series did not stabilise at t={t}")


def airy_initial_data(eps, xi=1):
    """phi0 and eps*phi'(xi) of Ai(-x eps^(-2/3)) + i Bi(-x eps^(-2/3))."""
    eps = mpf(eps)
    scale = eps ** (mpf(-2) / 3)
    ai, bi, aip, bip = airy_pair(-mpf(xi) * scale)
    phi0 = mpc(ai, bi)
    phi1 = -mp.cbrt(eps) * mpc(aip, bip)
    return phi0, phi1


def airy_problem(eps, interval=(1, 2)):
    """The Airy test problem a(x) = x with Airy initial data at xi."""
    from .wkb import IVProblem

    phi0, phi1 = airy_initial_data(eps, interval[0])
    return IVProblem("x", interval, eps, phi0, phi1)


def airy_solution(eps, points):
    """Exact solution values of the Airy test problem at ``points``."""
    eps = mpf(eps)
    scale = eps ** (mpf(-2) / 3)
    c = mp.cbrt(eps)
    phi, dphi = [], []
    for x in points:
        ai, bi, aip, bip = airy_pair(-mpf(x) * scale)
        phi.append(mpc(ai, bi))
        dphi.append(-c * mpc(aip, bip))
    return OracleSolution(tuple(points), tuple(phi), tuple(dphi), mpf(10) ** (2 - mp.dps), "airy-analytic")


def plane_wave_solution(problem, points):
    """Closed-form solution for constant a."""
    if not is_constant(problem.a):
        raise ContractError("plane-wave oracle needs a constant coefficient")
    k = mp.sqrt(evaluate(problem.a, problem.xi))
    phi, dphi = [], []
    for x in points:
        theta = k * (mpf(x) - problem.xi) / problem.eps
        c, s = mp.cos(theta), mp.sin(theta)
        phi.append(problem.phi0 * c + problem.phi1 / k * s)
        dphi.append(-problem.phi0 * k * s + problem.phi1 * c)
    return OracleSolution(tuple(points), tuple(phi), tuple(dphi), mpf(10) ** (4 - mp.dps), "plane-wave")


def _taylor_run(problem, points, steps, order):
    """One fixed-step Taylor integration; values at ``points`` (ascending)."""
    xi, eta, eps = problem.xi, problem.eta, problem.eps
    h = (eta - xi) / steps
    ratio = h / eps
    u, v = problem.phi0, problem.phi1
    out_u, out_v = [], []
    idx = 0
    pts = [mpf(p) for p in points]
    for s in range(steps):
        x0 = xi + s * h
        x1 = eta if s == steps - 1 else xi + (s + 1) * h
        aj = eval_jet(problem.a, x0, order)
        hp = mpf(1)
        A = []
        for c in aj.coeffs:
            A.append(c * hp)
            hp *= h
        # coefficients in tau = (x - x0)/h of u = phi and v = eps phi'
        U, V = [u], [v]
        for k in range(order):
            U.append(ratio * V[k] / (k + 1))
            V.append(-ratio * mp.fdot(A[: k + 1], U[k::-1]) / (k + 1))
        while idx < len(pts) and (pts[idx] <= x1 or s == steps - 1):
            tau = (pts[idx] - x0) / h
            out_u.append(mp.polyval(U[::-1], tau))
            out_v.append(mp.polyval(V[::-1], tau))
            idx += 1
        u = mp.fsum(U)
        v = mp.fsum(V)
    return out_u, out_v


def integrate_ivp(problem, tol, points, *, order=DEFAULT_TAYLOR_ORDER, max_halvings=12):
    """Brute-force reference solution by Taylor-series stepping.

    Starts with step ~ eps and halves it until two successive runs agree to
    ``tol`` on ``points``; returns the finer run.  Cost grows like 1/eps.
    """
    tol = mpf(tol)
    if problem.eps < mpf("1e-4"):
        raise ContractError("ODE oracle supports eps >= 1e-4 only")
    if tol < mpf(10) ** (8 - mp.dps):
        raise ContractError(f"tolerance {mp.nstr(tol, 3)} below the precision floor 1e{8 - mp.dps}")
    if order < 8:
        raise ContractError("integrator order must be at least 8")
    points = tuple(sorted(mpf(p) for p in points))
    if points[0] < problem.xi or points[-1] > problem.eta:
        raise ContractError("oracle points must lie inside the problem interval")
    steps = max(1, int(mp.ceil((problem.eta - problem.xi) / problem.eps)))
    prev = _taylor_run(problem, points, steps, order)
    for _ in range(max_halvings):
        steps *= 2
        cur = _taylor_run(problem, points, steps, order)
        diff = max(
            max(abs(a - b) for a, b in zip(prev[0], cur[0])),
            max(abs(a - b) for a, b in zip(prev[1], cur[1])),
        )
        if diff <= tol:
            return OracleSolution(points, tuple(cur[0]), tuple(cur[1]), max(diff, mpf(10) ** (2 - mp.dps)), "brute-force-ode")
        prev = cur
    raise OracleError(f"ODE oracle did not reach tolerance {mp.nstr(tol, 3)} within {max_halvings} halvings")


def sup_error(values, oracle: OracleSolution, points=None):
    """max_i |values[i] - oracle.phi[i]| on the oracle grid."""
    if len(values) != len(oracle.phi):
        raise ContractError(f"grid mismatch: {len(values)} values vs {len(oracle.phi)} oracle points")
    if points is not None and tuple(mpf(p) for p in points) != tuple(oracle.points):
        raise ContractError("grid mismatch: evaluation points differ from the oracle grid")
    return max(abs(a - b) for a, b in zip(values, oracle.phi))


def reference_for(problem, points, kind="auto", tol=None):
    """Pick and run an oracle: ``airy``, ``plane-wave``, ``ode`` or ``auto``."""
    if kind == "auto":
        if is_constant(problem.a):
            kind = "plane-wave"
        elif isinstance(problem.a, Var) and _is_airy_data(problem):
            kind = "airy"
        else:
            kind = "ode"
    if kind == "airy":
        if not isinstance(problem.a, Var):
            raise ContractError("the Airy oracle requires a(x) = x")
        return airy_solution(problem.eps, points)
    if kind == "plane-wave":
        return plane_wave_solution(problem, points)
    if kind == "ode":
        return integrate_ivp(problem, tol if tol is not None else mpf(10) ** (8 - mp.dps), points)
    raise ContractError(f"unknown oracle {kind!r}")


def _is_airy_data(problem):
    phi0, phi1 = airy_initial_data(problem.eps, problem.xi)
    scale = max(abs(phi0), abs(phi1))
    return abs(phi0 - problem.phi0) <= scale * mpf(10) ** (4 - mp.dps) and abs(phi1 - problem.phi1) <= scale * mpf(
        10
    ) ** (4 - mp.dps)
