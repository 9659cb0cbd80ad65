import pytest
from mpmath import mp, mpc, mpf

from wkbtrunc.errors import ContractError, NumericDomainError, OracleError
from wkbtrunc.oracle import (
    OracleSolution,
    airy_initial_data,
    airy_pair,
    airy_problem,
    airy_solution,
    integrate_ivp,
    oracle_grid,
    plane_wave_solution,
    reference_for,
    sup_error,
)
from wkbtrunc.wkb import IVProblem, evaluate_on_grid, solve

I = mpc(0, 1)


def test_values_at_zero():
    ai, bi, aip, bip = airy_pair(0)
    # series constants: Ai(0) = 3^(-2/3)/Gamma(2/3), Bi(0) = 3^(-1/6)/Gamma(2/3)
    assert abs(ai - mpf("0.3550280538878172392600631860041831763980")) < mpf(10) ** -33
    assert abs(bi - mpf("0.6149266274460007351509223690936135535947")) < mpf(10) ** -33
    assert abs(aip + mpf("0.2588194037928067984051835601892039634790")) < mpf(10) ** -33
    assert abs(bip - mpf("0.4482883573538263579148237103988283908662")) < mpf(10) ** -33


@pytest.mark.parametrize("t", ["-0.5", "-3.7", "-12", "-25.5", "-40"])
def test_against_mpmath_airy(t):
    t = mpf(t)
    ai, bi, aip, bip = airy_pair(t)
    ref = (mp.airyai(t), mp.airybi(t), mp.airyai(t, 1), mp.airybi(t, 1))
    for ours, theirs in zip((ai, bi, aip, bip), ref):
        assert abs(ours - theirs) <= mpf(10) ** (2 - mp.dps) * max(1, abs(theirs))


@pytest.mark.parametrize("t", ["0", "-1", "-9.9", "-33.3", "-40"])
def test_wronskian(t):
    ai, bi, aip, bip = airy_pair(mpf(t))
    assert abs(ai * bip - aip * bi - 1 / mp.pi) <= mpf(10) ** (4 - mp.dps)


def test_airy_range_limits():
    with pytest.raises(NumericDomainError):
        airy_pair(-41)
    with pytest.raises(ContractError):
        airy_pair(1)


def test_higher_precision_is_consistent():
    with mp.workdps(60):
        hi = airy_pair(mpf(-20))
    lo = airy_pair(mpf(-20))
    assert all(abs(a - b) < mpf(10) ** -32 for a, b in zip(lo, hi))


def test_grid_is_ascending_with_endpoints():
    g = oracle_grid((1, 2), 257)
    assert len(g) == 257 and g[0] == 1 and g[-1] == 2
    assert all(a < b for a, b in zip(g, g[1:]))


def test_ode_oracle_plane_wave():
    eps = mpf("0.1")
    p = IVProblem("1", (0, 1), eps, 1, -I)
    pts = oracle_grid((0, 1), 9)
    sol = integrate_ivp(p, mpf(10) ** -22, pts)
    assert sol.method == "brute-force-ode"
    for x, u, v in zip(pts, sol.phi, sol.eps_dphi):
        assert abs(u - mp.exp(-I * x / eps)) < mpf(10) ** -22
        assert abs(v + I * mp.exp(-I * x / eps)) < mpf(10) ** -22
    closed = plane_wave_solution(p, pts)
    assert sup_error(sol.phi, closed) < mpf(10) ** -22


def test_cross_oracle_airy():
    eps = mpf("0.1")
    pts = oracle_grid((1, 2), 9)
    ode = integrate_ivp(airy_problem(eps), mpf(10) ** -25, pts)
    exact = airy_solution(eps, pts)
    assert sup_error(ode.phi, exact) < mpf(10) ** -25
    assert max(abs(a - b) for a, b in zip(ode.eps_dphi, exact.eps_dphi)) < mpf(10) ** -25


def test_scaled_wronskian_is_constant():
    a, eps = "1+0.25*sin(3*x)", mpf("0.2")
    pts = oracle_grid((0, 1), 7)
    u = integrate_ivp(IVProblem(a, (0, 1), eps, 1, 0), mpf(10) ** -24, pts)
    v = integrate_ivp(IVProblem(a, (0, 1), eps, 0, 1), mpf(10) ** -24, pts)
    w = [p * dq - dp * q for p, dp, q, dq in zip(u.phi, u.eps_dphi, v.phi, v.eps_dphi)]
    assert all(abs(x - 1) < mpf(10) ** -23 for x in w)


def test_ode_oracle_contracts():
    p = IVProblem("1", (0, 1), mpf("0.5"), 1, 0)
    with pytest.raises(ContractError):
        integrate_ivp(p, mpf(10) ** -40, [0, 1])
    with pytest.raises(ContractError):
        integrate_ivp(p, mpf(10) ** -10, [0, 1], order=4)
    with pytest.raises(ContractError):
        integrate_ivp(IVProblem("1", (0, 1), mpf("5e-5"), 1, 0), mpf(10) ** -10, [0, 1])
    with pytest.raises(OracleError):
        integrate_ivp(p, mpf(10) ** -20, [0, 1], order=8, max_halvings=1)


def test_sup_error_examples():
    ref = OracleSolution((0, 1, 2), (mpc(1), mpc(2), mpc(3)), (0, 0, 0), 0, "test")
    assert sup_error([1, 2, 3], ref) == 0
    assert sup_error([1, mpc(2, "0.25"), 3], ref) == mpf("0.25")
    with pytest.raises(ContractError):
        sup_error([1, 2], ref)


def test_reference_dispatch():
    pts = oracle_grid((1, 2), 5)
    eps = mpf("0.1")
    assert reference_for(airy_problem(eps), pts).method == "airy-analytic"
    assert reference_for(IVProblem("2", (1, 2), eps, 1, 0), pts).method == "plane-wave"
    assert reference_for(IVProblem("x", (1, 2), eps, 1, 0), pts, tol=mpf(10) ** -15).method == "brute-force-ode"
    with pytest.raises(ContractError):
        reference_for(IVProblem("2", (1, 2), eps, 1, 0), pts, "airy")


def test_error_ordering_and_grid_refinement(phase_table):
    eps = mpf("0.1")
    t = phase_table("x", N_max=3)
    p = airy_problem(eps)
    errs = {}
    for n_pts in (129, 257):
        pts = oracle_grid((1, 2), n_pts)
        ref = airy_solution(eps, pts)
        errs[n_pts] = {N: sup_error(evaluate_on_grid(solve(p, N, t), pts)[0], ref) for N in (1, 3)}
    assert errs[257][3] < errs[257][1]
    for N in (1, 3):
        assert abs(errs[129][N] - errs[257][N]) <= errs[257][N] / 10


def test_airy_initial_data_matches_pair():
    eps = mpf("0.05")
    phi0, phi1 = airy_initial_data(eps)
    ai, bi, aip, bip = airy_pair(-eps ** (mpf(-2) / 3))
    assert phi0 == mpc(ai, bi)
    assert abs(phi1 + mp.cbrt(eps) * mpc(aip, bip)) < mpf(10) ** -32
