"""Chebyshev representation of functions on [xi, eta] in working precision.

Transforms are direct O(M^2) cosine sums; at the degrees used here
(M <= ~256) this is cheap next to the extended-precision arithmetic and
avoids the bookkeeping of an FFT.
"""

from __future__ import annotations

import functools
import math
import warnings

import numpy as np
from mpmath import mp, mpf, fdot

from .errors import ContractError, NumericDomainError, ResolutionError, ResolutionWarning

DEFAULT_DEGREE = 64
DEFAULT_REFINEMENT = 8


@functools.lru_cache(maxsize=64)
def _cos_table(M, dps):
    # cos(m*pi/M) for m = 0..2M-1; jk mod 2M indexes into it
    with mp.workdps(dps):
        return tuple(mp.cospi(mpf(m) / M) for m in range(2 * M))


class ChebGrid:
    """Chebyshev extreme points ``x_k = mid + half*cos(k*pi/M)``, k = 0..M.

    Nodes decrease from ``eta`` (k=0) to ``xi`` (k=M); both endpoints are
    stored exactly.
    """

    def __init__(self, xi, eta, M: int):
        xi, eta = mpf(xi), mpf(eta)
        if not xi < eta:
            raise ContractError(f"empty interval [{xi}, {eta}]")
        if M < 1:
            raise ContractError(f"degree must be >= 1, got {M}")
        self.xi, self.eta, self.M = xi, eta, int(M)
        mid, half = (xi + eta) / 2, (eta - xi) / 2
        cos = _cos_table(self.M, mp.dps)
        nodes = [mid + half * cos[k] for k in range(self.M + 1)]
        nodes[0], nodes[-1] = eta, xi
        self.nodes = tuple(nodes)

    @property
    def interval(self):
        return (self.xi, self.eta)

    def __len__(self):
        return self.M + 1


class ChebSeries:
    """``f(x) = sum_j b_j T_j(t)`` with ``t = (2x - xi - eta) / (eta - xi)``."""

    __slots__ = ("xi", "eta", "coeffs")

    def __init__(self, xi, eta, coeffs):
        self.xi, self.eta = mpf(xi), mpf(eta)
        self.coeffs = tuple(coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def interval(self):
        return (self.xi, self.eta)

    def __call__(self, x):
        return coeffs_to_value(self, x)

    def __neg__(self):
        return ChebSeries(self.xi, self.eta, [-b for b in self.coeffs])

    def scale(self, factor):
        return ChebSeries(self.xi, self.eta, [factor * b for b in self.coeffs])

    def __repr__(self):
        return f"ChebSeries([{self.xi}, {self.eta}], degree={self.degree})"

    def tail_ratio(self):
        """``max(|b_{M-1}|, |b_M|) / max_j |b_j|`` (0 for the zero series)."""
        big = max(abs(b) for b in self.coeffs)
        if big == 0:
            return mpf(0)
        tail = max(abs(b) for b in self.coeffs[-2:])
        return tail / big

    def is_resolved(self, digits_lost: int = 8) -> bool:
        return self.tail_ratio() <= mpf(10) ** (digits_lost - mp.dps)


def values_to_coeffs(values, grid: ChebGrid) -> ChebSeries:
    """Interpolate node values (in grid order) by a degree-M series."""
    M = grid.M
    if len(values) != M + 1:
        raise ContractError(f"expected {M + 1} values for degree {M}, got {len(values)}")
    cos = _cos_table(M, mp.dps)
    two_m = 2 * M
    v = list(values)
    v[0] = v[0] / 2
    v[M] = v[M] / 2
    coeffs = []
    for j in range(M + 1):
        b = fdot(v, [cos[(j * k) % two_m] for k in range(M + 1)]) * 2 / M
        if j == 0 or j == M:
            b = b / 2
        coeffs.append(b)
    return ChebSeries(grid.xi, grid.eta, coeffs)


def chebfit(f, grid: ChebGrid) -> ChebSeries:
    """Sample the callable ``f`` on ``grid`` and interpolate."""
    return values_to_coeffs([f(x) for x in grid.nodes], grid)


def _to_unit(s: ChebSeries, x):
    x = mpf(x)
    width = s.eta - s.xi
    slack = width * mpf(10) ** (3 - mp.dps)
    if x < s.xi - slack or x > s.eta + slack:
        raise NumericDomainError(f"x={mp.nstr(x, 17)} outside [{s.xi}, {s.eta}]; no extrapolation")
    if x == s.xi:
        return mpf(-1)
    if x == s.eta:
        return mpf(1)
    t = (2 * x - s.xi - s.eta) / width
    return min(max(t, mpf(-1)), mpf(1))


def _endpoint_value(coeffs, sign):
    # T_j(+-1) = (+-1)^j; b_0 is added last so that the antiderivative's
    # normalisation (b_0 = -tail sum) cancels bit-for-bit at xi
    tail = coeffs[1:]
    if sign < 0:
        tail = [b if j % 2 == 0 else -b for j, b in enumerate(tail, start=1)]
    return coeffs[0] + fdot(tail, [1] * len(tail)) if tail else coeffs[0]


def coeffs_to_value(s: ChebSeries, x):
    """Clenshaw evaluation at ``x`` in [xi, eta]."""
    t = _to_unit(s, x)
    c = s.coeffs
    if t == 1 or t == -1:
        return _endpoint_value(c, int(t))
    b1 = b2 = 0
    two_t = 2 * t
    for b in reversed(c[1:]):
        b1, b2 = two_t * b1 - b2 + b, b1
    return t * b1 - b2 + c[0]


def basis_matrix(xs, interval, degree):
    """Rows ``[T_0(t_i), ..., T_degree(t_i)]`` for the points ``xs``.

    Used to evaluate many series on one fixed set of points.
    """
    probe = ChebSeries(interval[0], interval[1], [0])
    rows = []
    for x in xs:
        t = _to_unit(probe, x)
        row = [mpf(1), t]
        for _ in range(degree - 1):
            row.append(2 * t * row[-1] - row[-2])
        rows.append(row[: degree + 1])
    return rows


def evaluate_with_matrix(s: ChebSeries, matrix):
    c = s.coeffs
    n = len(c)
    return [fdot(c, row[:n]) for row in matrix]


def antiderivative(s: ChebSeries) -> ChebSeries:
    """Degree M+1 antiderivative that vanishes at ``xi``."""
    b = list(s.coeffs) + [0, 0]
    half = (s.eta - s.xi) / 2
    M = s.degree
    c = [0] * (M + 2)
    for k in range(1, M + 2):
        if k == 1:
            c[1] = (2 * b[0] - b[2]) / 2
        else:
            c[k] = (b[k - 1] - b[k + 1]) / (2 * k)
        c[k] = c[k] * half
    tail = [ck if k % 2 == 0 else -ck for k, ck in enumerate(c[1:], start=1)]
    c[0] = -fdot(tail, [1] * len(tail))
    return ChebSeries(s.xi, s.eta, c)


def integrate(s: ChebSeries):
    """Integral over [xi, eta] (Clenshaw-Curtis on the M+1 nodes)."""
    return coeffs_to_value(antiderivative(s), s.eta)


def _golden_max(f, lo, hi, f_best):
    """Maximise a unimodal ``f`` on [lo, hi]; stops at ~half the working digits in x."""
    invphi = (mp.sqrt(5) - 1) / 2
    steps = int(math.ceil((mp.dps / 2 + 2) * math.log(10) / math.log(1.618)))
    c, d = hi - invphi * (hi - lo), lo + invphi * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(steps):
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = f(d)
    return max(f_best, fc, fd)


def sup_norm(s: ChebSeries, refinement: int = DEFAULT_REFINEMENT, candidates: int = 4):
    """max |s(x)| on [xi, eta].

    A float64 sweep over the scaled coefficients on a Chebyshev grid of
    ``refinement * M`` intervals picks the ``candidates`` largest samples.
    Those are re-evaluated in working precision; interior local maxima are
    then polished by golden-section search between the neighbouring samples,
    so smooth interior peaks are found to working precision as well.
    """
    big = max(abs(b) for b in s.coeffs)
    if big == 0:
        return mpf(0)
    M = max(s.degree, 1)
    n_fine = refinement * M
    scaled = np.array([complex(b / big) for b in s.coeffs])
    k = np.arange(n_fine + 1)
    j = np.arange(len(scaled))
    approx = np.abs(np.cos(np.pi * np.outer(k, j) / n_fine) @ scaled)
    best = np.argsort(approx)[::-1][:candidates]
    cos = _cos_table(n_fine, mp.dps)
    mid, half = (s.xi + s.eta) / 2, (s.eta - s.xi) / 2

    def at(i):
        return s.eta if i == 0 else s.xi if i == n_fine else mid + half * cos[i]

    def f(x):
        return abs(coeffs_to_value(s, x))

    values = []
    for idx in sorted(int(i) for i in best):
        v = f(at(idx))
        if 0 < idx < n_fine and approx[idx] >= max(approx[idx - 1], approx[idx + 1]):
            v = _golden_max(f, at(idx + 1), at(idx - 1), v)
        values.append(v)
    return max(values)


def check_resolution(series, label="series", *, strict=False, digits_lost=8):
    """Warn (or raise with ``strict``) when the tail coefficients are too large."""
    if series.is_resolved(digits_lost):
        return True
    msg = (
        f"{label}: Chebyshev tail ratio {mp.nstr(series.tail_ratio(), 3)} exceeds "
        f"1e{digits_lost - mp.dps}; increase the degree M"
    )
    if strict:
        raise ResolutionError(msg)
    warnings.warn(msg, ResolutionWarning, stacklevel=2)
    return False
