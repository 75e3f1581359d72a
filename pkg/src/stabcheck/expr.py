"""Expressions for the components of a vector field f(x, u).

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := atom ('^' uint)?
    atom   := number | ident | '(' expr ')' | '-' factor | func '(' expr ')'
    ident  := ('x'|'u') uint | 't'
    func   := sin | cos | exp | sqrt | abs

A unary minus applies to a whole factor, so ``-x1^2`` is ``-(x1^2)``.
The free parameter ``t`` is only accepted when the caller asks for it
(probe loops are written as functions of t).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

import numpy as np

from .interval import DomainError, Interval, iabs, icos, iexp, isin, isqrt

FUNCTIONS = ("sin", "cos", "exp", "sqrt", "abs")

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.position = position


# AST -------------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float
    text: str = field(default="", compare=False)

    @property
    def exact(self) -> bool:
        text = self.text or repr(self.value)
        return Fraction(text) == Fraction(self.value)


@dataclass(frozen=True)
class Var:
    kind: str  # "x", "u" or "t"
    index: int = 0  # 1-based for x and u


@dataclass(frozen=True)
class Neg:
    arg: Expression


@dataclass(frozen=True)
class BinOp:
    op: str
    left: Expression
    right: Expression


@dataclass(frozen=True)
class Pow:
    base: Expression
    exponent: int


@dataclass(frozen=True)
class Func:
    name: str
    arg: Expression


Expression = Union[Num, Var, Neg, BinOp, Pow, Func]


# Parsing ---------------------------------------------------------------------


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = match.lastgroup
        if kind != "ws":
            tokens.append((kind, match.group(), pos))
        pos = match.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, n: int, m: int, allow_t: bool):
        self.tokens = _tokenize(text)
        self.i = 0
        self.n, self.m, self.allow_t = n, m, allow_t

    @property
    def tok(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.tok
        if text != value or kind == "end":
            found = "end of input" if kind == "end" else repr(text)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", pos)
        self.i += 1

    def parse(self) -> Expression:
        node = self.expr()
        kind, text, pos = self.tok
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {text!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.tok[1] in ("+", "-") and self.tok[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.tok[1] in ("*", "/") and self.tok[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        node = self.atom()
        if self.tok[1] == "^":
            self.take()
            kind, text, pos = self.tok
            if kind != "number" or not text.isdigit():
                raise ExprSyntaxError("exponent must be a non-negative integer", pos)
            self.take()
            node = Pow(node, int(text))
        return node

    def atom(self):
        kind, text, pos = self.tok
        if kind == "number":
            self.take()
            return Num(float(text), text)
        if kind == "name":
            self.take()
            return self.name(text, pos)
        if text == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        if text == "-":
            self.take()
            return Neg(self.factor())
        found = "end of input" if kind == "end" else repr(text)
        raise ExprSyntaxError(f"unexpected {found}", pos)

    def name(self, text, pos):
        if text in FUNCTIONS:
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return Func(text, arg)
        if text == "t" and self.allow_t:
            return Var("t")
        match = re.fullmatch(r"([xu])(\d+)", text)
        if match is None:
            raise ExprSyntaxError(f"unknown identifier {text!r}", pos)
        kind, index = match.group(1), int(match.group(2))
        limit = self.n if kind == "x" else self.m
        if not 1 <= index <= limit:
            raise ExprSyntaxError(
                f"variable {text} out of range (n={self.n}, m={self.m})", pos
            )
        return Var(kind, index)


def parse(text: str, n: int, m: int = 0, *, allow_t: bool = False) -> Expression:
    """Parse `text` into an expression over x1..xn, u1..um (and t if allowed)."""
    if n < 1 or m < 0:
        raise ValueError("need n >= 1 and m >= 0")
    return _Parser(text, n, m, allow_t).parse()


# Printing --------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def to_text(e: Expression) -> str:
    """Render `e` in the input grammar; parse(to_text(e)) == e."""
    return _fmt(e, 0)


def _fmt(e, ctx):
    if isinstance(e, Num):
        s = e.text or repr(e.value)
        return s if ctx < 4 else f"({s})"
    if isinstance(e, Var):
        return "t" if e.kind == "t" else f"{e.kind}{e.index}"
    if isinstance(e, Func):
        return f"{e.name}({_fmt(e.arg, 0)})"
    if isinstance(e, Pow):
        s = f"{_fmt(e.base, 4)}^{e.exponent}"
        return s if ctx < 4 else f"({s})"
    if isinstance(e, Neg):
        s = "-" + _fmt(e.arg, 3)
        return s if ctx < 2 else f"({s})"
    prec = _PREC[e.op]
    # left-associative: the right operand of - and / must bind tighter
    s = f"{_fmt(e.left, prec)} {e.op} {_fmt(e.right, prec + 1)}"
    return s if prec >= ctx else f"({s})"


def variables(e: Expression) -> set[Var]:
    if isinstance(e, Var):
        return {e}
    if isinstance(e, Num):
        return set()
    if isinstance(e, BinOp):
        return variables(e.left) | variables(e.right)
    if isinstance(e, (Neg, Func)):
        return variables(e.arg)
    return variables(e.base)


# Point evaluation ------------------------------------------------------------

_NP_FUNCS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "sqrt": np.sqrt, "abs": np.abs}


def evaluate(e: Expression, x, u=(), t=None):
    """Evaluate on floats or broadcastable arrays.

    `x` and `u` are sequences indexed by variable number (x[0] is x1).
    Array arguments are evaluated elementwise.
    """
    with np.errstate(all="ignore"):
        return _eval(e, x, u, t)


def _eval(e, x, u, t):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        if e.kind == "x":
            return x[e.index - 1]
        if e.kind == "u":
            return u[e.index - 1]
        if t is None:
            raise ValueError("expression uses t but no t was given")
        return t
    if isinstance(e, Neg):
        return -_eval(e.arg, x, u, t)
    if isinstance(e, Pow):
        base = _eval(e.base, x, u, t)
        out = np.power(base, float(e.exponent))
        return float(out) if np.ndim(out) == 0 else out
    if isinstance(e, Func):
        arg = _eval(e.arg, x, u, t)
        if e.name == "sqrt" and np.any(np.asarray(arg) < 0):
            raise DomainError("sqrt of a negative number", mask=np.asarray(arg) < 0)
        out = _NP_FUNCS[e.name](arg)
        return float(out) if np.ndim(out) == 0 else out
    a = _eval(e.left, x, u, t)
    b = _eval(e.right, x, u, t)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if np.any(np.asarray(b) == 0):
        raise DomainError("division by zero", mask=np.asarray(b) == 0)
    return a / b


def eval_point(e: Expression, x, u=()) -> float:
    return float(evaluate(e, [float(v) for v in x], [float(v) for v in u]))


# Interval evaluation ---------------------------------------------------------

_INTERVAL_FUNCS = {"sin": isin, "cos": icos, "exp": iexp, "sqrt": isqrt, "abs": iabs}


def eval_interval(e: Expression, box, n: int | None = None) -> Interval:
    """Enclose the range of `e` over `box`.

    `box` lists one Interval per variable, states first then inputs
    (x1..xn, u1..um); `n` is the number of states and defaults to
    len(box), i.e. no inputs.
    """
    box = list(box)
    if n is None:
        n = len(box)
    return _ieval(e, box, n)


def _ieval(e, box, n):
    if isinstance(e, Num):
        if e.exact:
            return Interval.point(e.value)
        return Interval(float(np.nextafter(e.value, -np.inf)), float(np.nextafter(e.value, np.inf)))
    if isinstance(e, Var):
        if e.kind == "t":
            raise ValueError("interval evaluation does not support t")
        return box[e.index - 1] if e.kind == "x" else box[n + e.index - 1]
    if isinstance(e, Neg):
        return -_ieval(e.arg, box, n)
    if isinstance(e, Pow):
        return _ieval(e.base, box, n) ** e.exponent
    if isinstance(e, Func):
        return _INTERVAL_FUNCS[e.name](_ieval(e.arg, box, n))
    a = _ieval(e.left, box, n)
    b = _ieval(e.right, box, n)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    return a / b


def count_ops(e: Expression) -> int:
    """Number of rounded primitives in `e` (used to bound widening)."""
    if isinstance(e, (Num, Var)):
        return 0
    if isinstance(e, BinOp):
        return 1 + count_ops(e.left) + count_ops(e.right)
    if isinstance(e, Pow):
        return 1 + count_ops(e.base)
    if isinstance(e, Neg):
        return count_ops(e.arg)
    return 1 + count_ops(e.arg)
