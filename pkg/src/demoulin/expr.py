"""Closed-form expressions in two real variables x and y.

Grammar (left associative, power binds tightest, then unary minus):

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | atom ('^' int)?
    atom   := number | 'x' | 'y' | func '(' expr ')' | '(' expr ')'
    func   := exp | log | sin | cos | sinh | cosh | tanh

Powers are restricted to constant integer exponents, which keeps exact
differentiation closed over the grammar.  Trees are immutable and evaluation
is pure, so expressions are safe to share between workers.  The only
rewriting ever applied is constant folding plus dropping additive and
multiplicative identities; this keeps repeated derivatives compact (third
order partials of the coefficient functions are needed downstream) without
changing values anywhere the original tree is defined.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .errors import EvalDomainError, ParseError

__all__ = [
    "Const", "Var", "Neg", "BinOp", "Pow", "Call",
    "parse", "evaluate", "evaluate_array", "differentiate", "to_string",
    "FUNCTIONS",
]

FUNCTIONS = ("exp", "log", "sin", "cos", "sinh", "cosh", "tanh")


@dataclass(frozen=True)
class Const:
    value: float
    span: int | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str  # 'x' or 'y'
    span: int | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Neg:
    arg: "Expr"
    span: int | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"
    span: int | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int
    span: int | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"
    span: int | None = field(default=None, compare=False, repr=False)


Expr = Const | Var | Neg | BinOp | Pow | Call


# ---------------------------------------------------------------------------
# parsing

_NUMBER = re.compile(r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_INT = re.compile(r"-?\d+")


class _Parser:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def error(self, expected):
        raise ParseError(f"expected {expected}", self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch):
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def expr(self):
        node = self.term()
        while True:
            self.skip_ws()
            start = self.pos
            if self.take("+"):
                node = BinOp("+", node, self.term(), span=start)
            elif self.take("-"):
                node = BinOp("-", node, self.term(), span=start)
            else:
                return node

    def term(self):
        node = self.factor()
        while True:
            self.skip_ws()
            start = self.pos
            if self.take("*"):
                node = BinOp("*", node, self.factor(), span=start)
            elif self.take("/"):
                node = BinOp("/", node, self.factor(), span=start)
            else:
                return node

    def factor(self):
        self.skip_ws()
        start = self.pos
        if self.take("-"):
            return Neg(self.factor(), span=start)
        node = self.atom()
        self.skip_ws()
        if self.take("^"):
            self.skip_ws()
            m = _INT.match(self.text, self.pos)
            if not m:
                self.error("integer exponent after '^'")
            self.pos = m.end()
            return Pow(node, int(m.group()), span=start)
        return node

    def atom(self):
        self.skip_ws()
        start = self.pos
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            node = self.expr()
            if not self.take(")"):
                self.error("')'")
            return node
        m = _NUMBER.match(self.text, self.pos)
        if m:
            self.pos = m.end()
            return Const(float(m.group()), span=start)
        m = _IDENT.match(self.text, self.pos)
        if m:
            name = m.group()
            self.pos = m.end()
            if name in ("x", "y"):
                return Var(name, span=start)
            if name in FUNCTIONS:
                if not self.take("("):
                    self.error(f"'(' after function name '{name}'")
                node = self.expr()
                if not self.take(")"):
                    self.error("')'")
                return Call(name, node, span=start)
            raise ParseError(f"unknown identifier '{name}'", start)
        self.error("a number, 'x', 'y', a function call, or '('")


def parse(text):
    """Parse an expression string into an immutable tree.

    Raises ParseError (with byte offset) on syntax errors, unknown
    identifiers, and non-integer exponents.
    """
    p = _Parser(text)
    node = p.expr()
    p.skip_ws()
    if p.pos != len(text):
        p.error("end of input")
    return node


# ---------------------------------------------------------------------------
# evaluation

_FUNC_IMPL = {
    "exp": np.exp, "log": np.log, "sin": np.sin, "cos": np.cos,
    "sinh": np.sinh, "cosh": np.cosh, "tanh": np.tanh,
}


def _domain_error(kind, node, x, y):
    loc = f" (source offset {node.span})" if node.span is not None else ""
    raise EvalDomainError(
        f"{kind} in '{to_string(node)}'{loc} at (x, y) = ({x}, {y})")


def _eval(node, x, y, strict):
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return x if node.name == "x" else y
    if isinstance(node, Neg):
        return -_eval(node.arg, x, y, strict)
    if isinstance(node, BinOp):
        a = _eval(node.left, x, y, strict)
        b = _eval(node.right, x, y, strict)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if strict and b == 0.0:
            _domain_error("division by zero", node, x, y)
        return a / b
    if isinstance(node, Pow):
        base = _eval(node.base, x, y, strict)
        if strict and node.exponent < 0 and base == 0.0:
            _domain_error("zero raised to a negative power", node, x, y)
        return base ** node.exponent
    a = _eval(node.arg, x, y, strict)
    if strict and node.func == "log" and a <= 0.0:
        _domain_error("log of a non-positive value", node, x, y)
    return _FUNC_IMPL[node.func](a)


def evaluate(node, x, y):
    """Strict scalar evaluation.  IEEE double arithmetic; log of a
    non-positive value and division by zero raise EvalDomainError naming
    the offending subtree."""
    return float(_eval(node, float(x), float(y), True))


def evaluate_array(node, x, y):
    """Vectorized evaluation over broadcast numpy arrays.

    Lenient IEEE semantics: out-of-domain points yield inf/nan instead of
    raising, so grid scans stay cheap.  Callers that need hard domain
    checks use `evaluate` pointwise.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = np.broadcast_shapes(x.shape, y.shape)
    with np.errstate(all="ignore"):
        val = _eval(node, x, y, False)
    return np.broadcast_to(np.asarray(val, dtype=float), shape)


# ---------------------------------------------------------------------------
# construction helpers (constant folding only)

_ZERO = Const(0.0)
_ONE = Const(1.0)


def _is_const(e, v=None):
    return isinstance(e, Const) and (v is None or e.value == v)


def _neg(a):
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def _add(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return BinOp("+", a, b)


def _sub(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return _neg(b)
    return BinOp("-", a, b)


def _mul(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return _ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    return BinOp("*", a, b)


def _div(a, b):
    # 0/e is NOT folded away: the quotient keeps the domain restriction.
    if isinstance(a, Const) and isinstance(b, Const) and b.value != 0.0:
        return Const(a.value / b.value)
    if _is_const(b, 1.0):
        return a
    return BinOp("/", a, b)


def _powi(a, n):
    if n == 0:
        return _ONE
    if n == 1:
        return a
    if isinstance(a, Const) and (a.value != 0.0 or n > 0):
        return Const(a.value ** n)
    return Pow(a, n)


# ---------------------------------------------------------------------------
# differentiation

def differentiate(node, var):
    """Exact partial derivative with respect to 'x' or 'y'.

    Total on the grammar and closed under it; the result agrees with a
    central difference wherever both are finite.
    """
    if var not in ("x", "y"):
        raise ValueError(f"variable must be 'x' or 'y', got {var!r}")
    return _diff(node, var)


def _diff(node, var):
    if isinstance(node, Const):
        return _ZERO
    if isinstance(node, Var):
        return _ONE if node.name == var else _ZERO
    if isinstance(node, Neg):
        return _neg(_diff(node.arg, var))
    if isinstance(node, BinOp):
        da = _diff(node.left, var)
        db = _diff(node.right, var)
        if node.op == "+":
            return _add(da, db)
        if node.op == "-":
            return _sub(da, db)
        if node.op == "*":
            return _add(_mul(da, node.right), _mul(node.left, db))
        num = _sub(_mul(da, node.right), _mul(node.left, db))
        return _div(num, _powi(node.right, 2))
    if isinstance(node, Pow):
        inner = _mul(Const(float(node.exponent)), _powi(node.base, node.exponent - 1))
        return _mul(inner, _diff(node.base, var))
    da = _diff(node.arg, var)
    a = node.arg
    if node.func == "exp":
        return _mul(node, da)
    if node.func == "log":
        return _div(da, a)
    if node.func == "sin":
        return _mul(Call("cos", a), da)
    if node.func == "cos":
        return _neg(_mul(Call("sin", a), da))
    if node.func == "sinh":
        return _mul(Call("cosh", a), da)
    if node.func == "cosh":
        return _mul(Call("sinh", a), da)
    # tanh' = 1 - tanh^2
    return _mul(_sub(_ONE, _powi(Call("tanh", a), 2)), da)


# ---------------------------------------------------------------------------
# printing

def to_string(node):
    """Canonical fully parenthesized form.  parse(to_string(e)) evaluates
    identically to e."""
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_string(node.arg)})"
    if isinstance(node, BinOp):
        return f"({to_string(node.left)} {node.op} {to_string(node.right)})"
    if isinstance(node, Pow):
        return f"({to_string(node.base)})^{node.exponent}"
    return f"{node.func}({to_string(node.arg)})"
