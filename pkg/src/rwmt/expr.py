"""Single-variable arithmetic expressions with exact forward-mode derivatives.

The expression language is deliberately small: decimal numbers, the variable
``t``, the binary operators ``+ - * / ^`` (with ``^`` right-associative and
binding tightest, then unary minus, then ``* /``, then ``+ -``), and the
functions exp, log, sin, cos, sinh, cosh, tanh, sqrt.

Derivatives are computed by evaluating the tree on dual numbers, never by
finite differences; second derivatives use nested duals.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

FUNCTION_NAMES = ("exp", "log", "sin", "cos", "sinh", "cosh", "tanh", "sqrt")


class ExprError(ValueError):
    """Syntax or evaluation error; carries the source offset when known."""

    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (offset {offset})"
        super().__init__(message)


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    lhs: "Node"
    rhs: "Node"


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Node"


Node = Union[Const, Var, Neg, BinOp, Call]


# ---------------------------------------------------------------------------
# Dual numbers


class Dual:
    """Dual number a + b*eps; a and b may themselves be Duals (nesting)."""

    __slots__ = ("a", "b")

    def __init__(self, a, b):
        self.a = a
        self.b = b

    def __repr__(self):
        return f"Dual({self.a!r}, {self.b!r})"

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.a + other.a, self.b + other.b)
        return Dual(self.a + other, self.b)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.a - other.a, self.b - other.b)
        return Dual(self.a - other, self.b)

    def __rsub__(self, other):
        return Dual(other - self.a, -self.b)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.a * other.a, self.a * other.b + self.b * other.a)
        return Dual(self.a * other, self.b * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            inv = other.a * other.a
            return Dual(self.a / other.a,
                        (self.b * other.a - self.a * other.b) / inv)
        return Dual(self.a / other, self.b / other)

    def __rtruediv__(self, other):
        inv = self.a * self.a
        return Dual(other / self.a, -(other * self.b) / inv)

    def __neg__(self):
        return Dual(-self.a, -self.b)

    def __pow__(self, k):
        return _pow(self, k)


def real_part(x):
    """Strip dual layers down to the underlying float."""
    while isinstance(x, Dual):
        x = x.a
    return x


def _apply(fn: str, x):
    if isinstance(x, Dual):
        fa = _apply(fn, x.a)
        if fn == "exp":
            d = fa
        elif fn == "log":
            d = 1.0 / x.a
        elif fn == "sin":
            d = _apply("cos", x.a)
        elif fn == "cos":
            d = -_apply("sin", x.a)
        elif fn == "sinh":
            d = _apply("cosh", x.a)
        elif fn == "cosh":
            d = _apply("sinh", x.a)
        elif fn == "tanh":
            d = 1.0 - fa * fa
        elif fn == "sqrt":
            d = 0.5 / fa
        else:  # pragma: no cover - parser rejects unknown names
            raise ExprError(f"unknown function {fn!r}")
        return Dual(fa, x.b * d)
    try:
        return getattr(math, fn)(x)
    except ValueError as exc:
        raise ExprError(f"domain error in {fn}({x!r}): {exc}") from None


def _int_pow(x, k: int):
    if k == 0:
        return 1.0
    if k < 0:
        return 1.0 / _int_pow(x, -k)
    out = x
    for _ in range(k - 1):
        out = out * x
    return out


def _pow(x, y):
    if not isinstance(y, Dual):
        yf = float(y)
        if yf.is_integer():
            return _int_pow(x, int(yf))
        if isinstance(x, Dual):
            return _apply("exp", _apply("log", x) * yf)
        if x <= 0.0:
            raise ExprError(f"{x!r} ^ {yf!r} has no real value")
        return math.pow(x, yf)
    return _apply("exp", _apply("log", x) * y)


# ---------------------------------------------------------------------------
# Evaluation


def evaluate(node: Node, t):
    """Evaluate the tree at t, which may be a float or a Dual."""
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return t
    if isinstance(node, Neg):
        return -evaluate(node.arg, t)
    if isinstance(node, Call):
        return _apply(node.fn, evaluate(node.arg, t))
    lhs = evaluate(node.lhs, t)
    rhs = evaluate(node.rhs, t)
    op = node.op
    if op == "+":
        return lhs + rhs
    if op == "-":
        return lhs - rhs
    if op == "*":
        return lhs * rhs
    if op == "/":
        return lhs / rhs
    if op == "^":
        return _pow(lhs, rhs)
    raise ExprError(f"unknown operator {op!r}")  # pragma: no cover


def _eps_part(x):
    """Dual part of x; 0 when the tree collapsed to a plain number."""
    return x.b if isinstance(x, Dual) else 0.0


def derivative(node: Node, t: float, order: int = 1) -> float:
    """Exact derivative of the given order (0, 1 or 2) at t."""
    if order == 0:
        return float(evaluate(node, t))
    if order == 1:
        return float(real_part(_eps_part(evaluate(node, Dual(t, 1.0)))))
    if order == 2:
        x = Dual(Dual(t, 1.0), Dual(1.0, 0.0))
        return float(real_part(_eps_part(_eps_part(evaluate(node, x)))))
    raise ValueError("order must be 0, 1 or 2")


# ---------------------------------------------------------------------------
# Tokenizer / parser

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?"
    r"|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(source: str):
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None or m.end() == pos:
            stripped = source[pos:].lstrip()
            if not stripped:
                break
            off = len(source) - len(stripped)
            raise ExprError(f"unexpected character {source[off]!r}", off)
        if m.group("num") is not None:
            tokens.append(("num", float(m.group("num")), m.start("num")))
        elif m.group("name") is not None:
            tokens.append(("name", m.group("name"), m.start("name")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", None, len(source)))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, val, off = self.next()
        if kind != "op" or val != op:
            raise ExprError(f"expected {op!r}", off)

    def parse(self) -> Node:
        node = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ExprError(f"trailing input {val!r}", off)
        return node

    def expr(self) -> Node:
        node = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.next()
                node = BinOp(val, node, self.term())
            else:
                return node

    def term(self) -> Node:
        node = self.unary()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.next()
                node = BinOp(val, node, self.unary())
            else:
                return node

    def unary(self) -> Node:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.next()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        node = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.next()
            # the exponent may carry its own sign: 2^-3
            return BinOp("^", node, self.unary())
        return node

    def atom(self) -> Node:
        kind, val, off = self.next()
        if kind == "num":
            return Const(val)
        if kind == "name":
            if val == "t":
                return Var()
            if val in FUNCTION_NAMES:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(val, arg)
            raise ExprError(f"unknown identifier {val!r}", off)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExprError(f"unexpected token {val!r}", off)


def parse(source: str) -> Node:
    """Parse an expression in the variable t."""
    if not source or not source.strip():
        raise ExprError("empty expression", 0)
    return _Parser(source).parse()


# ---------------------------------------------------------------------------
# Pretty printer (round-trip stable: parse(to_source(n)) == n)

_PREC_ATOM = 100
_PREC_POW = 30
_PREC_NEG = 25
_PREC_MUL = 20
_PREC_ADD = 10


def _prec(node: Node) -> int:
    if isinstance(node, (Const, Var, Call)):
        return _PREC_ATOM
    if isinstance(node, Neg):
        return _PREC_NEG
    if node.op == "^":
        return _PREC_POW
    if node.op in "*/":
        return _PREC_MUL
    return _PREC_ADD


def _wrap(node: Node, minimum: int) -> str:
    s = to_source(node)
    return f"({s})" if _prec(node) < minimum else s


def to_source(node: Node) -> str:
    """Render the tree back to source text."""
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, Var):
        return "t"
    if isinstance(node, Call):
        return f"{node.fn}({to_source(node.arg)})"
    if isinstance(node, Neg):
        return "-" + _wrap(node.arg, _PREC_NEG + 1)
    op = node.op
    if op in "+-":
        lhs = _wrap(node.lhs, _PREC_ADD)
        rhs = _wrap(node.rhs, _PREC_ADD + 1)
        return f"{lhs} {op} {rhs}"
    if op in "*/":
        lhs = _wrap(node.lhs, _PREC_MUL)
        rhs = _wrap(node.rhs, _PREC_MUL + 1)
        return f"{lhs}{op}{rhs}"
    # '^': right-associative, lhs must be parenthesized unless atomic
    lhs = _wrap(node.lhs, _PREC_POW + 1)
    rhs = _wrap(node.rhs, _PREC_NEG)
    return f"{lhs}^{rhs}"
