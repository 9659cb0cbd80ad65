"""Truncated WKB solutions of eps^2 phi'' + a(x) phi = 0 on [xi, eta].

The phase derivatives S_n' satisfy

    S_0' = -+ i sqrt(a),   S_1' = -a'/(4a),
    S_n' = -(sum_{j=1}^{n-1} S_j' S_{n-j}' + S_{n-1}'') / (2 S_0'),   n >= 2,

independently of eps, so one :class:`PhaseTable` serves every eps.  Only
the minus branch (S_0' = -i sqrt(a)) is computed; the plus branch follows
from (S_n^+)' = (-1)^(n+1) (S_n^-)'.

On the minus branch S_n' is imaginary for even n and real for odd n.
Writing (S_n^-)' = (-i)^(1-n) R_n turns the recurrence into

    R_0 = sqrt(a),   R_1 = -a'/(4a),
    R_n = -(sum R_j R_{n-j} + R_{n-1}') / (2 R_0),

with every R_n real, so the per-node jet work runs in real arithmetic.  The
unit factor is reapplied exactly when complex values are requested.
"""

from __future__ import annotations

import concurrent.futures
import warnings
from dataclasses import dataclass, field

import gmpy2
from mpmath import mp, mpf, mpc

from . import jets
from .chebyshev import (
    DEFAULT_DEGREE,
    DEFAULT_REFINEMENT,
    ChebGrid,
    ChebSeries,
    antiderivative,
    basis_matrix,
    coeffs_to_value,
    evaluate_with_matrix,
    sup_norm,
    values_to_coeffs,
)
from .errors import (
    ContractError,
    ExponentOverflowError,
    IllConditionedMatchingError,
    NonPositiveCoefficientError,
    ResolutionError,
    ResolutionWarning,
)
from .expr import Expr, eval_jet, parse, validate_positivity


MINUS, PLUS = "-", "+"


def _as_expr(a):
    return parse(a) if isinstance(a, str) else a


def _unit_power(n: int, branch: str) -> int:
    """Exponent m with (S_n^branch)' = i^m R_n."""
    if branch == MINUS:
        return (3 * (1 - n)) % 4  # (-i)^(1-n)
    if branch == PLUS:
        return (1 - n) % 4  # i^(1-n)
    raise ContractError(f"branch must be '-' or '+', got {branch!r}")


def _rotate(value, m: int):
    """Exact multiplication of a real ``value`` by i^m."""
    if m == 0:
        return mpc(value, 0)
    if m == 1:
        return mpc(0, value)
    if m == 2:
        return mpc(-value, 0)
    return mpc(0, -value)


@dataclass(frozen=True)
class IVProblem:
    """eps^2 phi'' + a phi = 0 on [xi, eta], phi(xi) = phi0, eps phi'(xi) = phi1."""

    a: Expr
    interval: tuple
    eps: object
    phi0: object
    phi1: object
    check_positivity: bool = field(default=True, compare=False)

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "a", _as_expr(self.a))
        xi, eta = mpf(self.interval[0]), mpf(self.interval[1])
        if not xi < eta:
            raise ContractError(f"empty interval [{xi}, {eta}]")
        set_(self, "interval", (xi, eta))
        eps = mpf(self.eps)
        if not 0 < eps < 1:
            raise ContractError(f"eps must lie in (0, 1), got {eps}")
        set_(self, "eps", eps)
        set_(self, "phi0", mpc(jets.to_scalar(self.phi0)))
        set_(self, "phi1", mpc(jets.to_scalar(self.phi1)))
        if self.check_positivity:
            validate_positivity(self.a, self.interval)

    @property
    def xi(self):
        return self.interval[0]

    @property
    def eta(self):
        return self.interval[1]


_GUARD_BITS = 24


def _to_mpfr(x):
    sign, man, exp, _ = mpf(x)._mpf_
    v = gmpy2.mul_2exp(gmpy2.mpfr(man), exp)
    return -v if sign else v


def _to_mpf(v):
    man, exp = v.as_mantissa_exp()
    return mpf((int(man), int(exp)))


def _node_recurrence(a: Expr, x0, n_max: int):
    """Order-0 values R_0(x0) .. R_{n_max}(x0) of the reduced recurrence.

    Runs on gmpy2 ``mpfr`` with a few guard bits above the working
    precision; :func:`_node_recurrence_jets` is the slow reference path
    through the public :class:`~wkbtrunc.jets.Jet` API.
    """
    top = n_max + 2
    coeffs = eval_jet(a, x0, top).coeffs
    with gmpy2.context(gmpy2.get_context(), precision=mp.prec + _GUARD_BITS):
        fsum = gmpy2.fsum
        av = [_to_mpfr(c) for c in coeffs]
        # R_0 = sqrt(a)
        if av[0] <= 0:
            raise NonPositiveCoefficientError(f"a({mp.nstr(x0, 17)}) <= 0", x0)
        r0 = [gmpy2.sqrt(av[0])]
        half_inv = 1 / (2 * r0[0])
        for j in range(1, top + 1):
            s = av[j] - fsum([x * y for x, y in zip(r0[1:j], r0[j - 1 : 0 : -1])]) if j > 1 else av[j]
            r0.append(s * half_inv)
        values = [r0[0]]
        if n_max == 0:
            return [_to_mpf(v) for v in values]
        # 1 / (2 R_0)
        inv = [1 / (2 * r0[0])]
        for j in range(1, top + 1):
            inv.append(-fsum([x * y for x, y in zip(r0[1 : j + 1], inv[::-1])]) / r0[0])
        # R_1 = -a' / (4 a)
        inv_a = [1 / av[0]]
        for j in range(1, top):
            inv_a.append(-fsum([x * y for x, y in zip(av[1 : j + 1], inv_a[::-1])]) * inv_a[0])
        da = [(k + 1) * av[k + 1] for k in range(top)]
        r1 = [-fsum([x * y for x, y in zip(da[: k + 1], inv_a[k::-1])]) / 4 for k in range(top)]
        rs = [r0, r1]
        values.append(r1[0])
        for n in range(2, n_max + 1):
            order = top - n
            prev = rs[n - 1]
            lower = range(1, (n + 1) // 2)
            numer = []
            for k in range(order + 1):
                pair_sum = fsum([x * y for j in lower for x, y in zip(rs[j][: k + 1], rs[n - j][k::-1])])
                total = 2 * pair_sum + (k + 1) * prev[k + 1]
                if n % 2 == 0:
                    mid = rs[n // 2]
                    total += fsum([x * y for x, y in zip(mid[: k + 1], mid[k::-1])])
                numer.append(total)
            rn = [-fsum([x * y for x, y in zip(numer[: k + 1], inv[k::-1])]) for k in range(order + 1)]
            rs.append(rn)
            values.append(rn[0])
        return [_to_mpf(v) for v in values]


def _node_recurrence_jets(a: Expr, x0, n_max: int):
    """Complex (S_n^-)'(x0), n = 0..n_max, straight from the recurrence with Jets."""
    top = n_max + 2
    aj = eval_jet(a, x0, top)
    s0 = jets.jet_sqrt(aj).scale(mpc(0, -1))
    s = [s0]
    if n_max >= 1:
        s.append(-(aj.derivative() / aj.truncate(top - 1)).scale(mpf(1) / 4))
    for n in range(2, n_max + 1):
        k = top - n
        numer = s[n - 1].derivative()
        for j in range(1, n):
            numer = numer + jets.jet_mul(s[j].truncate(k), s[n - j].truncate(k))
        s.append(-jets.jet_div(numer, s0.truncate(k).scale(2)))
    return [sj.value for sj in s]


def _node_task(args):
    a, x0, n_max, dps = args
    with mp.workdps(dps):
        return _node_recurrence(a, x0, n_max)


class PhaseTable:
    """Minus-branch phase data {S_n', S_n}, n = 0..N_max, on a Chebyshev grid.

    Built by :func:`build_phase_table`; immutable afterwards apart from
    internal evaluation caches.
    """

    def __init__(self, a, grid, reduced_values, refinement=DEFAULT_REFINEMENT):
        self.a = a
        self.grid = grid
        self.N_max = len(reduced_values) - 1
        self.M = grid.M
        self._values = [tuple(v) for v in reduced_values]
        self._dseries = [values_to_coeffs(v, grid) for v in self._values]
        self._pseries = [antiderivative(s) for s in self._dseries]
        self.sup_norms = tuple(sup_norm(s, refinement) for s in self._dseries)
        self.tail_ratios = tuple(s.tail_ratio() for s in self._dseries)
        self._grid_cache = {}

    @property
    def interval(self):
        return self.grid.interval

    @property
    def xi(self):
        return self.grid.xi

    @property
    def eta(self):
        return self.grid.eta

    def _check_n(self, n):
        if not 0 <= n <= self.N_max:
            raise ContractError(f"order {n} outside 0..{self.N_max}")

    def unit_power(self, n, branch=MINUS):
        return _unit_power(n, branch)

    def reduced_derivative_series(self, n) -> ChebSeries:
        """Real series R_n with (S_n^-)' = (-i)^(1-n) R_n."""
        self._check_n(n)
        return self._dseries[n]

    def reduced_phase_series(self, n) -> ChebSeries:
        self._check_n(n)
        return self._pseries[n]

    def derivative_series(self, n, branch=MINUS) -> ChebSeries:
        """Complex Chebyshev series of (S_n^branch)'."""
        self._check_n(n)
        m = _unit_power(n, branch)
        s = self._dseries[n]
        return ChebSeries(s.xi, s.eta, [_rotate(b, m) for b in s.coeffs])

    def phase_series(self, n, branch=MINUS) -> ChebSeries:
        """Complex Chebyshev series of S_n^branch (vanishes at xi)."""
        self._check_n(n)
        m = _unit_power(n, branch)
        s = self._pseries[n]
        return ChebSeries(s.xi, s.eta, [_rotate(b, m) for b in s.coeffs])

    def node_values(self, n, branch=MINUS):
        """(S_n^branch)' at the grid nodes (eta first, xi last)."""
        self._check_n(n)
        m = _unit_power(n, branch)
        return [_rotate(v, m) for v in self._values[n]]

    def boundary_derivative(self, n, branch=MINUS):
        """(S_n^branch)'(xi), taken directly from the node recurrence."""
        self._check_n(n)
        return _rotate(self._values[n][-1], _unit_power(n, branch))

    def unresolved_orders(self, digits_lost=8):
        limit = mpf(10) ** (digits_lost - mp.dps)
        return [n for n, r in enumerate(self.tail_ratios) if r > limit]

    def reduced_on(self, xs):
        """Cached ``(phase, derivative)`` lists of R-series values at ``xs``.

        ``phase[n][i]`` is the reduced S_n at ``xs[i]``; multiply by the
        branch unit to get complex values.
        """
        key = (mp.dps, tuple(mpf(x) for x in xs))
        hit = self._grid_cache.get(key)
        if hit is None:
            matrix = basis_matrix(key[1], self.interval, self.M + 1)
            phase = [_endpoint_exact(s, key[1], evaluate_with_matrix(s, matrix)) for s in self._pseries]
            deriv = [evaluate_with_matrix(s, matrix) for s in self._dseries]
            hit = self._grid_cache[key] = (phase, deriv)
        return hit


def _endpoint_exact(series, xs, values):
    # keep S_n(xi) == 0 bit-exact where the grid contains xi
    return [coeffs_to_value(series, x) if x == series.xi else v for x, v in zip(xs, values)]


def build_phase_table(
    a,
    interval,
    N_max: int,
    M: int = DEFAULT_DEGREE,
    *,
    strict: bool = False,
    refinement: int = DEFAULT_REFINEMENT,
    workers: int = 1,
) -> PhaseTable:
    """Evaluate the phase recurrence at every Chebyshev node and interpolate.

    Each node carries a jet of ``a`` of order ``N_max + 2``; level n works at
    order ``N_max + 2 - n`` so the derivative needed by level n+1 is always
    available.  ``workers > 1`` spreads the nodes over a process pool.
    """
    jets.require_precision()
    a = _as_expr(a)
    if N_max < 0:
        raise ContractError(f"N_max must be >= 0, got {N_max}")
    xi, eta = mpf(interval[0]), mpf(interval[1])
    validate_positivity(a, (xi, eta), 4 * M)
    grid = ChebGrid(xi, eta, M)
    tasks = [(a, x, N_max, mp.dps) for x in grid.nodes]
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(workers) as pool:
            per_node = list(pool.map(_node_task, tasks))
    else:
        per_node = [_node_recurrence(a, x, N_max) for x in grid.nodes]
    reduced = [[node[n] for node in per_node] for n in range(N_max + 1)]
    table = PhaseTable(a, grid, reduced, refinement)

    unresolved = table.unresolved_orders()
    if 0 in unresolved:
        raise ResolutionError(f"S_0' is not resolved at degree M={M}; increase M")
    if unresolved:
        msg = f"Chebyshev degree M={M} under-resolves S_n' for n in {unresolved}"
        if strict:
            raise ResolutionError(msg)
        warnings.warn(msg, ResolutionWarning, stacklevel=2)
    return table


def plus_branch_series(table: PhaseTable, n: int):
    """Series of (S_n^+)' and S_n^+ obtained from the minus branch.

    Even n: both negated; odd n: identical.
    """
    table._check_n(n)
    d = table.derivative_series(n, MINUS)
    p = table.phase_series(n, MINUS)
    if n % 2 == 0:
        return -d, -p
    return d, p


def _branch_sum_at_xi(table, eps, N, branch):
    total = mpc(0)
    power = mpf(1)
    for n in range(N + 1):
        total += power * table.boundary_derivative(n, branch)
        power *= eps
    return total


def match_initial_conditions(table: PhaseTable, eps, N: int, phi0, phi1):
    """Coefficients (alpha, beta) so that phi_N(xi) = phi0, eps phi_N'(xi) = phi1."""
    if not 0 <= N <= table.N_max:
        raise ContractError(f"N={N} outside 0..{table.N_max}")
    eps = mpf(eps)
    phi0, phi1 = mpc(jets.to_scalar(phi0)), mpc(jets.to_scalar(phi1))
    s_plus = _branch_sum_at_xi(table, eps, N, PLUS)
    s_minus = _branch_sum_at_xi(table, eps, N, MINUS)
    denom = s_plus - s_minus
    if abs(denom) <= mpf(10) ** (6 - mp.dps):
        raise IllConditionedMatchingError(f"matching denominator {mp.nstr(denom, 5)} is numerically zero")
    alpha = (phi0 * s_plus - phi1) / denom
    beta = (phi1 - phi0 * s_minus) / denom
    return alpha, beta


@dataclass(frozen=True)
class WKBSolution:
    problem: IVProblem
    N: int
    alpha: object
    beta: object
    table: PhaseTable = field(repr=False)


def solve(problem: IVProblem, N: int, table: PhaseTable | None = None, M: int = DEFAULT_DEGREE) -> WKBSolution:
    """phi_N^WKB for ``problem``; builds a phase table when none is given."""
    if table is None:
        table = build_phase_table(problem.a, problem.interval, N, M)
    elif table.interval != problem.interval:
        raise ContractError("phase table interval differs from the problem interval")
    alpha, beta = match_initial_conditions(table, problem.eps, N, problem.phi0, problem.phi1)
    return WKBSolution(problem, N, alpha, beta, table)


def _overflow_limit():
    return mp.dps * mp.ln10


def _exponents(table, eps, N, phase_row, deriv_row):
    """Exponents E^-, E^+ and slopes Y^-, Y^+ at one point for orders 0..N.

    ``phase_row[n]``/``deriv_row[n]`` are the reduced values at that point.
    Yields the cumulative tuple after each order so callers can read every
    truncation in one pass.
    """
    # real/imag accumulators per branch; unit powers are exact rotations
    e = {MINUS: [mpf(0), mpf(0)], PLUS: [mpf(0), mpf(0)]}
    y = {MINUS: [mpf(0), mpf(0)], PLUS: [mpf(0), mpf(0)]}
    inv_eps = 1 / eps
    power = inv_eps  # eps^(n-1)
    for n in range(N + 1):
        p = power * phase_row[n]
        d = power * eps * deriv_row[n]
        for branch in (MINUS, PLUS):
            m = _unit_power(n, branch)
            acc_e, acc_y = e[branch], y[branch]
            sign = -1 if m >= 2 else 1
            idx = m % 2
            acc_e[idx] += sign * p
            acc_y[idx] += sign * d
        power *= eps
        yield n, e, y


def _combine(alpha, beta, e, y, with_derivative=True):
    limit = _overflow_limit()
    out_phi = mpc(0)
    out_dphi = mpc(0)
    for coeff, branch in ((alpha, MINUS), (beta, PLUS)):
        re, im = e[branch]
        if re > limit:
            raise ExponentOverflowError(
                f"WKB exponent real part {mp.nstr(re, 5)} exceeds {mp.nstr(limit, 5)} "
                "(non-oscillatory regime or truncation order far too large)"
            )
        wave = coeff * mp.exp(mpc(re, im))
        out_phi += wave
        if with_derivative:
            out_dphi += wave * mpc(*y[branch])
    return out_phi, out_dphi


def _point_rows(table, x):
    phase = [coeffs_to_value(s, x) for s in table._pseries]
    deriv = [coeffs_to_value(s, x) for s in table._dseries]
    return phase, deriv


def _evaluate_point(sol: WKBSolution, x):
    table = sol.table
    phase, deriv = _point_rows(table, x)
    for n, e, y in _exponents(table, sol.problem.eps, sol.N, phase, deriv):
        pass
    return _combine(sol.alpha, sol.beta, e, y)


def evaluate_wkb(sol: WKBSolution, x):
    """phi_N^WKB(x)."""
    return _evaluate_point(sol, x)[0]


def evaluate_scaled_derivative(sol: WKBSolution, x):
    """eps * d/dx phi_N^WKB(x)."""
    return _evaluate_point(sol, x)[1]


def evaluate_on_grid(sol: WKBSolution, xs):
    """Lists ``(phi, eps_dphi)`` at the points ``xs`` (uses the table cache)."""
    table = sol.table
    phase, deriv = table.reduced_on(xs)
    phis, dphis = [], []
    for i in range(len(xs)):
        prow = [phase[n][i] for n in range(sol.N + 1)]
        drow = [deriv[n][i] for n in range(sol.N + 1)]
        for n, e, y in _exponents(table, sol.problem.eps, sol.N, prow, drow):
            pass
        phi, dphi = _combine(sol.alpha, sol.beta, e, y)
        phis.append(phi)
        dphis.append(dphi)
    return phis, dphis


def truncation_family(table: PhaseTable, eps, phi0, phi1, xs, N_values=None):
    """phi_N^WKB on ``xs`` for every N in ``N_values`` (default 0..N_max).

    Returns ``{N: list of values or None}``; ``None`` marks orders whose
    exponent overflowed somewhere on the grid.
    """
    eps = mpf(eps)
    if N_values is None:
        N_values = range(table.N_max + 1)
    wanted = sorted(set(int(n) for n in N_values))
    if wanted and (wanted[0] < 0 or wanted[-1] > table.N_max):
        raise ContractError(f"truncation orders must lie in 0..{table.N_max}")
    coeffs = {}
    for N in wanted:
        try:
            coeffs[N] = match_initial_conditions(table, eps, N, phi0, phi1)
        except IllConditionedMatchingError:
            coeffs[N] = None
    phase, deriv = table.reduced_on(xs)
    top = wanted[-1] if wanted else -1
    out = {N: ([] if coeffs[N] is not None else None) for N in wanted}
    for i in range(len(xs)):
        prow = [phase[n][i] for n in range(top + 1)]
        drow = [deriv[n][i] for n in range(top + 1)]
        for n, e, y in _exponents(table, eps, top, prow, drow):
            if n not in out or out[n] is None:
                continue
            alpha, beta = coeffs[n]
            try:
                out[n].append(_combine(alpha, beta, e, y, with_derivative=False)[0])
            except ExponentOverflowError:
                out[n] = None
    return out
