import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp, mpf

from wkbtrunc.errors import ContractError, JetDivisionError, NumericDomainError
from wkbtrunc.jets import (
    Jet,
    get_precision,
    jet_add,
    jet_antiderivative,
    jet_derivative,
    jet_div,
    jet_exp,
    jet_log,
    jet_mul,
    jet_sqrt,
    precision,
    set_precision,
)


def J(coeffs, x0=0):
    return Jet(x0, coeffs)


def close(u, v, digits):
    tol = mpf(10) ** (-digits)
    scale = max([mpf(1)] + [abs(c) for c in u.coeffs])
    return all(abs(a - b) <= tol * scale for a, b in zip(u.coeffs, v.coeffs))


# --- examples -------------------------------------------------------------


def test_add_identity_and_inverse():
    assert jet_add(J([1, 2, 3]), J([0, 0, 0])) == J([1, 2, 3])
    assert jet_add(J([1, 1], 1), J([-1, -1], 1)) == J([0, 0], 1)


def test_add_variable_and_constant():
    s = Jet.variable(2, 2) + Jet.constant(1, 2, 2)
    assert s.coeffs == (3, 1, 0)


def test_add_mismatch_is_contract_error():
    with pytest.raises(ContractError):
        jet_add(J([1, 2]), J([1, 2, 3]))
    with pytest.raises(ContractError):
        jet_add(J([1, 2], 0), J([1, 2], 1))


def test_mul_examples():
    assert jet_mul(J([1, 1, 0]), J([1, 1, 0])).coeffs == (1, 2, 1)
    u = J([3, -1, 2, 5], 1)
    assert jet_mul(u, Jet.constant(1, 1, 3)) == u
    x = Jet.variable(1, 3)
    assert (x * x).coeffs == (1, 2, 1, 0)


def test_div_examples():
    assert jet_div(J([1, 0, 0], 3), J([1, 1, 0], 3)).coeffs == (1, -1, 1)
    u = J([2, 3, -1, 4])
    assert close(u / u, J([1, 0, 0, 0]), 33)
    q = jet_div(Jet.constant(-1, 1, 1), Jet.variable(1, 1).scale(4))
    assert q.coeffs == (mpf(-1) / 4, mpf(1) / 4)


def test_div_by_zero_and_underflow():
    with pytest.raises(JetDivisionError):
        jet_div(J([1, 0]), J([0, 1]))
    with pytest.raises(JetDivisionError):
        jet_div(J([1, 0]), J([mpf(10) ** -40, 1]))


def test_sqrt_examples():
    s = jet_sqrt(Jet.variable(1, 3))
    assert s.coeffs == (1, mpf(1) / 2, mpf(-1) / 8, mpf(1) / 16)
    assert jet_sqrt(Jet.constant(4, 0, 3)).coeffs == (2, 0, 0, 0)
    x = Jet.variable(2, 2)
    assert close(jet_sqrt(x * x), J([2, 1, 0], 2), 33)


def test_sqrt_branch_cut():
    with pytest.raises(NumericDomainError):
        jet_sqrt(J([-1, 1]))
    with pytest.raises(NumericDomainError):
        jet_sqrt(J([0, 1]))


def test_derivative_examples():
    assert jet_derivative(J([5, 6, 3])).coeffs == (6, 6)
    assert all(c == 0 for c in jet_derivative(Jet.constant(7, 0, 3)).coeffs)
    cube = Jet.variable(0, 3) ** 3
    assert jet_derivative(jet_derivative(cube)).coeffs == (0, 6)
    with pytest.raises(ContractError):
        jet_derivative(J([1]))


def test_exp_log_inverse():
    u = J([mpf("0.3"), 2, -1, mpf("0.5")], 1)
    assert close(jet_log(jet_exp(u)), u, 32)


def test_precision_context():
    assert get_precision() == 34
    with precision(60):
        assert mp.dps == 60
    assert mp.dps == 34
    with pytest.raises(ContractError):
        set_precision(20)


def test_scalar_sanity_constants():
    # reference digits, not recomputed by mpmath
    e = mpf("2.718281828459045235360287471352662497757")
    pi = mpf("3.141592653589793238462643383279502884197")
    r2 = mpf("1.414213562373095048801688724209698078570")
    tol = mpf(10) ** -33
    assert abs(mp.exp(1) - e) / e < tol
    assert abs(4 * mp.atan(1) - pi) / pi < tol
    assert abs(mp.sqrt(2) - r2) / r2 < tol


# --- properties -----------------------------------------------------------

coef = st.floats(min_value=-10, max_value=10, allow_nan=False)
K = 5


def jets(min0=None):
    first = st.floats(min_value=0.5, max_value=10) if min0 else coef
    return st.tuples(first, *[coef] * K).map(lambda cs: Jet(1, [mpf(c) for c in cs]))


@settings(max_examples=60, deadline=None)
@given(jets(), jets(), jets())
def test_ring_axioms(u, v, w):
    assert close((u + v) + w, u + (v + w), 32)
    assert close(u * v, v * u, 32)
    assert close((u * v) * w, u * (v * w), 30)
    assert close(u * (v + w), u * v + u * w, 30)


@settings(max_examples=60, deadline=None)
@given(jets(min0=True))
def test_sqrt_squares_back(u):
    s = jet_sqrt(u)
    assert close(s * s, u, 31)


@settings(max_examples=60, deadline=None)
@given(jets())
def test_derivative_inverts_antiderivative(u):
    back = jet_derivative(jet_antiderivative(u))
    assert close(back, u, 33)
