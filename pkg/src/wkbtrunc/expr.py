"""Coefficient expressions a(x): parsing, scalar and jet evaluation.

Grammar (lowest to highest precedence)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' ['-'] INTEGER)?
    atom   := NUMBER | 'x' | FUNC '(' expr ')' | '(' expr ')'

with FUNC one of sqrt, exp, ln, sin, cos.  Exponents must be integer
literals, so every expression is analytic wherever it is defined.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from mpmath import mp, mpf

from . import jets
from .errors import ExprDomainError, ExprSyntaxError, NonPositiveCoefficientError, NumericDomainError
from .jets import Jet

FUNCTIONS = ("sqrt", "exp", "ln", "sin", "cos")


@dataclass(frozen=True)
class Const:
    text: str


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Expr"


Expr = Union[Const, Var, Neg, BinOp, Pow, Call]

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^()])"
    r")"
)


def _tokenize(source):
    pos = 0
    tokens = []
    n = len(source)
    while pos < n:
        if source[pos:].strip() == "":
            break
        m = _TOKEN.match(source, pos)
        if m is None or m.end() == pos:
            start = pos + len(source[pos:]) - len(source[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {source[start]!r}", start)
        kind = m.lastgroup
        text = m.group(kind)
        if text == "**":
            text = "^"
        tokens.append((kind, text, m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source):
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        kind, tok, pos = self.take()
        if tok != text:
            found = "end of input" if kind == "end" else repr(tok)
            raise ExprSyntaxError(f"expected {text!r}, found {found}", pos)

    def parse(self):
        e = self.expr()
        kind, tok, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {tok!r}", pos)
        return e

    def expr(self):
        left = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            left = BinOp(op, left, self.term())
        return left

    def term(self):
        left = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            left = BinOp(op, left, self.unary())
        return left

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] != ("op", "^"):
            return base
        self.take()
        sign = 1
        if self.peek()[:2] == ("op", "-"):
            self.take()
            sign = -1
        kind, tok, pos = self.take()
        if kind == "num" and re.fullmatch(r"\d+", tok):
            return Pow(base, sign * int(tok))
        if kind == "op" and tok == "(":
            # allow x^(-2) and x^(3)
            inner_sign = 1
            if self.peek()[:2] == ("op", "-"):
                self.take()
                inner_sign = -1
            kind2, tok2, pos2 = self.take()
            if kind2 == "num" and re.fullmatch(r"\d+", tok2):
                self.expect(")")
                return Pow(base, sign * inner_sign * int(tok2))
            raise ExprSyntaxError("non-integer exponent", pos2)
        raise ExprSyntaxError("non-integer exponent", pos)

    def atom(self):
        kind, tok, pos = self.take()
        if kind == "num":
            return Const(tok)
        if kind == "name":
            if tok == "x":
                return Var()
            if tok in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(tok, arg)
            raise ExprSyntaxError(f"unknown identifier {tok!r}", pos)
        if tok == "(":
            e = self.expr()
            self.expect(")")
            return e
        found = "end of input" if kind == "end" else repr(tok)
        raise ExprSyntaxError(f"unexpected {found}", pos)


def parse(source: str) -> Expr:
    """Parse ``source`` into an expression tree."""
    return _Parser(source).parse()


def to_source(e: Expr) -> str:
    """Fully parenthesised text that parses back to the same tree."""
    if isinstance(e, Const):
        return e.text
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Neg):
        return f"(-{to_source(e.operand)})"
    if isinstance(e, BinOp):
        return f"({to_source(e.left)} {e.op} {to_source(e.right)})"
    if isinstance(e, Pow):
        exp = str(e.exponent) if e.exponent >= 0 else f"({e.exponent})"
        return f"({to_source(e.base)}^{exp})"
    if isinstance(e, Call):
        return f"{e.name}({to_source(e.arg)})"
    raise TypeError(f"not an expression node: {e!r}")


def is_constant(e: Expr) -> bool:
    """True when ``x`` does not occur in the tree."""
    if isinstance(e, Var):
        return False
    if isinstance(e, Const):
        return True
    if isinstance(e, Neg):
        return is_constant(e.operand)
    if isinstance(e, BinOp):
        return is_constant(e.left) and is_constant(e.right)
    if isinstance(e, Pow):
        return is_constant(e.base)
    return is_constant(e.arg)


def _domain(msg, e, x):
    return ExprDomainError(f"{msg} in {to_source(e)} at x={mp.nstr(x, 17)}", to_source(e), x)


def evaluate(e: Expr, x):
    """Evaluate ``e`` at the real point ``x`` in working precision."""
    x = mpf(x)

    def ev(node):
        if isinstance(node, Const):
            return mpf(node.text)
        if isinstance(node, Var):
            return x
        if isinstance(node, Neg):
            return -ev(node.operand)
        if isinstance(node, BinOp):
            a, b = ev(node.left), ev(node.right)
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return a * b
            if abs(b) < jets.underflow_threshold():
                raise _domain("division by zero", node, x)
            return a / b
        if isinstance(node, Pow):
            b = ev(node.base)
            if node.exponent < 0 and abs(b) < jets.underflow_threshold():
                raise _domain("negative power of zero", node, x)
            return b ** node.exponent
        v = ev(node.arg)
        if node.name == "sqrt":
            if v < 0:
                raise _domain("square root of a negative number", node, x)
            return mp.sqrt(v)
        if node.name == "ln":
            if v <= 0:
                raise _domain("logarithm of a nonpositive number", node, x)
            return mp.log(v)
        return getattr(mp, node.name)(v)

    return ev(e)


def eval_jet(e: Expr, x0, order: int) -> Jet:
    """Taylor jet of ``e`` at ``x0`` up to ``order``."""
    x0 = mpf(x0)

    def ev(node):
        if isinstance(node, Const):
            return Jet.constant(mpf(node.text), x0, order)
        if isinstance(node, Var):
            return Jet.variable(x0, order)
        if isinstance(node, Neg):
            return -ev(node.operand)
        try:
            if isinstance(node, BinOp):
                a, b = ev(node.left), ev(node.right)
                if node.op == "+":
                    return a + b
                if node.op == "-":
                    return a - b
                if node.op == "*":
                    return jets.jet_mul(a, b)
                return jets.jet_div(a, b)
            if isinstance(node, Pow):
                return jets.jet_powi(ev(node.base), node.exponent)
            arg = ev(node.arg)
            if node.name == "sqrt":
                return jets.jet_sqrt(arg)
            if node.name == "ln":
                return jets.jet_log(arg)
            if node.name == "exp":
                return jets.jet_exp(arg)
            if node.name == "sin":
                return jets.jet_sin(arg)
            return jets.jet_cos(arg)
        except ExprDomainError:
            raise
        except NumericDomainError as exc:
            raise _domain(str(exc), node, x0) from exc

    return ev(e)


def validate_positivity(e: Expr, interval, grid_size: int = 256):
    """Smallest sampled value of ``e`` on a Chebyshev grid over ``interval``.

    Sampling is a heuristic guard, not a proof of positivity.  Raises
    :class:`NonPositiveCoefficientError` at the first nonpositive sample.
    """
    from .chebyshev import ChebGrid

    xi, eta = interval
    grid = ChebGrid(xi, eta, max(int(grid_size) - 1, 1))
    a_min = None
    for x in reversed(grid.nodes):
        try:
            v = evaluate(e, x)
        except ExprDomainError as exc:
            raise NonPositiveCoefficientError(
                f"coefficient undefined at x={mp.nstr(x, 17)}: {exc}", x
            ) from exc
        if v <= 0:
            raise NonPositiveCoefficientError(
                f"turning point / nonpositive coefficient: a({mp.nstr(x, 17)}) = {mp.nstr(v, 10)}", x
            )
        if a_min is None or v < a_min:
            a_min = v
    return a_min
