"""Extended-precision scalars and truncated Taylor (jet) arithmetic.

Scalars are plain mpmath numbers (``mpf`` for real data, ``mpc`` for
complex); the working precision is mpmath's global ``mp.dps``, managed
through :func:`set_precision` / :func:`precision`.

A :class:`Jet` stores normalised Taylor coefficients ``c_j = f^(j)(x0)/j!``
for ``j = 0..K``.  All operations truncate at order K, so derivatives of
compositions come out exact up to rounding.
"""

from __future__ import annotations

import contextlib

from mpmath import mp, mpf, mpc, fdot

from .errors import ContractError, JetDivisionError, NumericDomainError

MIN_PRECISION = 34
DEFAULT_PRECISION = 34


def set_precision(digits: int) -> None:
    """Set the global working precision in significant decimal digits."""
    digits = int(digits)
    if digits < MIN_PRECISION:
        raise ContractError(f"precision must be >= {MIN_PRECISION} digits, got {digits}")
    mp.dps = digits


def get_precision() -> int:
    return mp.dps


def require_precision() -> None:
    """Raise unless the working precision meets the quadruple-precision floor."""
    if mp.dps < MIN_PRECISION:
        raise ContractError(
            f"working precision is {mp.dps} digits; call set_precision() with >= {MIN_PRECISION}"
        )


# mpmath starts at 15 digits; lift it to the floor unless the caller already went higher
if mp.dps < DEFAULT_PRECISION:
    mp.dps = DEFAULT_PRECISION


@contextlib.contextmanager
def precision(digits: int):
    """Temporarily run at ``digits`` significant digits."""
    old = mp.dps
    set_precision(digits)
    try:
        yield
    finally:
        mp.dps = old


def to_scalar(value):
    """Convert ints, strings, floats, pairs ``(re, im)`` or mpmath numbers."""
    if isinstance(value, (tuple, list)):
        re, im = value
        return mpc(mp.mpmathify(re), mp.mpmathify(im))
    return mp.mpmathify(value)


def underflow_threshold():
    """Magnitude below which a leading coefficient counts as zero."""
    return mpf(10) ** (3 - mp.dps)


class Jet:
    """Truncated Taylor expansion of order ``K`` at ``x0``.

    >>> Jet.variable(1, 2).coeffs
    (mpf('1.0'), mpf('1.0'), mpf('0.0'))
    """

    __slots__ = ("x0", "coeffs")

    def __init__(self, x0, coeffs):
        if len(coeffs) == 0:
            raise ContractError("a jet needs at least one coefficient")
        self.x0 = mpf(x0)
        self.coeffs = tuple(to_scalar(c) for c in coeffs)

    @classmethod
    def _raw(cls, x0, coeffs):
        # trusted constructor: coeffs already mpmath numbers, x0 already mpf
        self = object.__new__(cls)
        self.x0 = x0
        self.coeffs = tuple(coeffs)
        return self

    @classmethod
    def constant(cls, value, x0, order):
        zero = mpf(0)
        return cls._raw(mpf(x0), [to_scalar(value)] + [zero] * order)

    @classmethod
    def variable(cls, x0, order):
        """Jet of the identity function ``x -> x``."""
        x0 = mpf(x0)
        coeffs = [x0, mpf(1)] + [mpf(0)] * (order - 1)
        return cls._raw(x0, coeffs[: order + 1])

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def value(self):
        return self.coeffs[0]

    def __len__(self):
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs)

    def __getitem__(self, j):
        return self.coeffs[j]

    def __repr__(self):
        return f"Jet(x0={self.x0}, coeffs={list(self.coeffs)})"

    def __eq__(self, other):
        if not isinstance(other, Jet):
            return NotImplemented
        return self.x0 == other.x0 and self.coeffs == other.coeffs

    __hash__ = None

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise ContractError(f"cannot raise jet order {self.order} to {order}")
        return Jet._raw(self.x0, self.coeffs[: order + 1])

    def derivative(self) -> "Jet":
        return jet_derivative(self)

    def scale(self, factor) -> "Jet":
        factor = to_scalar(factor)
        return Jet._raw(self.x0, [factor * c for c in self.coeffs])

    def __add__(self, other):
        if isinstance(other, Jet):
            return jet_add(self, other)
        c = list(self.coeffs)
        c[0] = c[0] + to_scalar(other)
        return Jet._raw(self.x0, c)

    __radd__ = __add__

    def __neg__(self):
        return Jet._raw(self.x0, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            return jet_mul(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return jet_div(self, other)
        return self.scale(1 / to_scalar(other))

    def __rtruediv__(self, other):
        return jet_div(Jet.constant(other, self.x0, self.order), self)

    def __pow__(self, exponent):
        return jet_powi(self, exponent)


def _check_compatible(u: Jet, v: Jet) -> None:
    if u.x0 != v.x0:
        raise ContractError(f"jets expanded at different points: {u.x0} vs {v.x0}")
    if u.order != v.order:
        raise ContractError(f"jets of different order: {u.order} vs {v.order}")


def jet_add(u: Jet, v: Jet) -> Jet:
    _check_compatible(u, v)
    return Jet._raw(u.x0, [a + b for a, b in zip(u.coeffs, v.coeffs)])


def jet_mul(u: Jet, v: Jet) -> Jet:
    """Truncated Cauchy product."""
    _check_compatible(u, v)
    a, b = u.coeffs, v.coeffs
    return Jet._raw(u.x0, [fdot(a[: j + 1], b[j::-1]) for j in range(len(a))])


def jet_sum_of_products(pairs, order=None) -> Jet:
    """Return ``sum(u * v for u, v in pairs)`` with one rounding per coefficient.

    Jets may have different orders; the result has order ``order`` (default:
    the smallest order among the operands).
    """
    pairs = list(pairs)
    if not pairs:
        raise ContractError("empty product sum")
    x0 = pairs[0][0].x0
    for u, v in pairs:
        if u.x0 != x0 or v.x0 != x0:
            raise ContractError("jets expanded at different points")
    if order is None:
        order = min(min(u.order, v.order) for u, v in pairs)
    coeffs = []
    for j in range(order + 1):
        terms = []
        for u, v in pairs:
            a, b = u.coeffs, v.coeffs
            terms.extend(zip(a[: j + 1], b[j::-1]))
        coeffs.append(fdot(terms))
    return Jet._raw(x0, coeffs)


def _leading_ok(c0) -> bool:
    return abs(c0) >= underflow_threshold()


def jet_div(u: Jet, v: Jet) -> Jet:
    """Return w with ``w * v == u`` to order K."""
    _check_compatible(u, v)
    b = v.coeffs
    if not _leading_ok(b[0]):
        raise JetDivisionError(f"division by a jet with leading coefficient {b[0]}")
    inv = 1 / b[0]
    w = []
    for j, uj in enumerate(u.coeffs):
        if j:
            uj = uj - fdot(b[1 : j + 1], w[::-1])
        w.append(uj * inv)
    return Jet._raw(u.x0, w)


def _on_branch_cut(c0) -> bool:
    return mp.im(c0) == 0 and mp.re(c0) <= 0


def jet_sqrt(u: Jet) -> Jet:
    """Principal square root; the branch cut is the nonpositive real axis."""
    a = u.coeffs
    if _on_branch_cut(a[0]) or not _leading_ok(a[0]):
        raise NumericDomainError(f"jet_sqrt: leading coefficient {a[0]} on the branch cut")
    w0 = mp.sqrt(a[0])
    inv = 1 / (2 * w0)
    w = [w0]
    for j in range(1, len(a)):
        s = a[j]
        if j > 1:
            s = s - fdot(w[1:j], w[j - 1 : 0 : -1])
        w.append(s * inv)
    return Jet._raw(u.x0, w)


def jet_derivative(u: Jet) -> Jet:
    """Jet of f' at the same point, one order lower."""
    if u.order < 1:
        raise ContractError("cannot differentiate an order-0 jet")
    c = u.coeffs
    return Jet._raw(u.x0, [(j + 1) * c[j + 1] for j in range(u.order)])


def jet_antiderivative(u: Jet, constant=0) -> Jet:
    """Coefficient shift ``c_{j+1} = c_j / (j+1)``; order grows by one."""
    c = u.coeffs
    return Jet._raw(u.x0, [to_scalar(constant)] + [c[j] / (j + 1) for j in range(len(c))])


def jet_exp(u: Jet) -> Jet:
    a = u.coeffs
    da = [j * a[j] for j in range(len(a))]
    w = [mp.exp(a[0])]
    for k in range(1, len(a)):
        w.append(fdot(da[1 : k + 1], w[::-1]) / k)
    return Jet._raw(u.x0, w)


def jet_log(u: Jet) -> Jet:
    a = u.coeffs
    if _on_branch_cut(a[0]) or not _leading_ok(a[0]):
        raise NumericDomainError(f"jet_log: leading coefficient {a[0]} on the branch cut")
    inv = 1 / a[0]
    w = [mp.log(a[0])]
    dw = [mpf(0)]
    for k in range(1, len(a)):
        s = a[k]
        if k > 1:
            s = s - fdot(dw[1:k], a[k - 1 : 0 : -1]) / k
        w.append(s * inv)
        dw.append(k * w[k])
    return Jet._raw(u.x0, w)


def jet_sincos(u: Jet) -> tuple[Jet, Jet]:
    a = u.coeffs
    da = [j * a[j] for j in range(len(a))]
    s = [mp.sin(a[0])]
    c = [mp.cos(a[0])]
    for k in range(1, len(a)):
        s.append(fdot(da[1 : k + 1], c[::-1]) / k)
        c.append(-fdot(da[1 : k + 1], s[-2::-1]) / k)
    return Jet._raw(u.x0, s), Jet._raw(u.x0, c)


def jet_sin(u: Jet) -> Jet:
    return jet_sincos(u)[0]


def jet_cos(u: Jet) -> Jet:
    return jet_sincos(u)[1]


def jet_powi(u: Jet, n: int) -> Jet:
    """Integer power by repeated squaring; negative powers divide."""
    if int(n) != n:
        raise ContractError(f"jet_powi needs an integer exponent, got {n}")
    n = int(n)
    if n < 0:
        return jet_div(Jet.constant(1, u.x0, u.order), jet_powi(u, -n))
    result = Jet.constant(1, u.x0, u.order)
    base = u
    while n:
        if n & 1:
            result = jet_mul(result, base)
        n >>= 1
        if n:
            base = jet_mul(base, base)
    return result
