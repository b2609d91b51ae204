"""Metric expression language: tokenizer, recursive-descent parser, printer, jet evaluator.

Grammar (``^`` is right-associative, unary minus binds tighter than ``+``
and ``*`` but looser than ``^``, so ``-x^2`` is ``-(x^2)``)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | factor
    factor := base ('^' unary)?
    base   := number | ident | func '(' expr ')' | '(' expr ')'

Identifiers are coordinates (``x1``..``x4`` or declared coordinate names),
declared parameters, or the constant ``pi``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import DomainError, ExprSyntaxError, UnknownIdentifier
from .jets import Jet

FUNCTIONS = ("sin", "cos", "tan", "sinh", "cosh", "exp", "log", "sqrt", "neg")
CONSTANTS = {"pi": math.pi}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Coord:
    index: int  # 1..4


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class Func:
    name: str
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Num, Coord, Param, Func, BinOp]


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()]|−)
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    data = text.encode("utf-8")
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", text, _byte_offset(text, pos))
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            if value == "−":
                value = "-"
            tokens.append((kind, value, _byte_offset(text, pos)))
        pos = m.end()
    tokens.append(("end", "", len(data)))
    return tokens


def _byte_offset(text: str, char_pos: int) -> int:
    return len(text[:char_pos].encode("utf-8"))


class _Parser:
    def __init__(self, text, params, coords):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.params = set(params)
        self.coords = {name: k + 1 for k, name in enumerate(coords)}

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, off = self.peek()
        if val != value or kind == "end":
            what = "end of input" if kind == "end" else repr(val)
            raise ExprSyntaxError(f"expected {value!r}, found {what}", self.text, off)
        return self.take()

    def parse(self) -> Expr:
        node = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {val!r}", self.text, off)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val in ("-", "+"):
            self.take()
            arg = self.unary()
            return Func("neg", arg) if val == "-" else arg
        return self.factor()

    def factor(self):
        base = self.base()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def base(self):
        kind, val, off = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "ident":
            if val in FUNCTIONS and self.peek()[1] == "(":
                self.take()
                arg = self.expr()
                self.expect(")")
                return Func(val, arg)
            if val in FUNCTIONS:
                raise ExprSyntaxError(f"function {val!r} needs an argument", self.text, self.peek()[2])
            if val in self.coords:
                return Coord(self.coords[val])
            m = re.fullmatch(r"x([1-4])", val)
            if m:
                return Coord(int(m.group(1)))
            if val in self.params:
                return Param(val)
            if val in CONSTANTS:
                return Num(CONSTANTS[val])
            raise UnknownIdentifier(val, off)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        what = "end of input" if kind == "end" else repr(val)
        raise ExprSyntaxError(f"unexpected {what}", self.text, off)


def parse(text: str, params: Iterable[str] = (), coords: Sequence[str] = ()) -> Expr:
    """Parse ``text`` into an expression tree.

    ``params`` are the declared parameter names; ``coords`` optional names for
    the four coordinates (``x1``..``x4`` are always accepted).
    """
    return _Parser(text, params, coords).parse()


def to_text(node: Expr) -> str:
    """Print a tree so that ``parse(to_text(t)) == t``."""
    if isinstance(node, Num):
        if node.value < 0 or not math.isfinite(node.value):
            raise ValueError("number literals must be finite and non-negative")
        return repr(float(node.value))
    if isinstance(node, Coord):
        return f"x{node.index}"
    if isinstance(node, Param):
        return node.name
    if isinstance(node, Func):
        if node.name == "neg":
            return f"(-{to_text(node.arg)})"
        return f"{node.name}({to_text(node.arg)})"
    if isinstance(node, BinOp):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    raise TypeError(f"not an expression node: {node!r}")


def identifiers(node: Expr) -> tuple[set[int], set[str]]:
    """Coordinate indices and parameter names referenced by ``node``."""
    coords, params = set(), set()
    stack = [node]
    while stack:
        n = stack.pop()
        if isinstance(n, Coord):
            coords.add(n.index)
        elif isinstance(n, Param):
            params.add(n.name)
        elif isinstance(n, Func):
            stack.append(n.arg)
        elif isinstance(n, BinOp):
            stack.extend((n.left, n.right))
    return coords, params


def eval_jet(node: Expr, point: Sequence[float], params: Mapping[str, float] | None = None, order: int = 2) -> Jet:
    """Evaluate ``node`` with all partials up to ``order`` at ``point``."""
    if order not in (1, 2, 3):
        raise ValueError(f"order must be 1, 2 or 3, got {order}")
    params = params or {}
    point = [float(p) for p in point]
    cache: dict[int, Jet] = {}

    def ev(n):
        if isinstance(n, Num):
            return Jet(0, n.value)
        if isinstance(n, Coord):
            key = n.index
            if key not in cache:
                cache[key] = Jet.variable(n.index - 1, point, order)
            return cache[key]
        if isinstance(n, Param):
            try:
                return Jet(0, float(params[n.name]))
            except KeyError:
                raise UnknownIdentifier(n.name) from None
        if isinstance(n, Func):
            arg = ev(n.arg)
            if n.name == "neg":
                return -arg
            return getattr(arg, n.name)()
        if isinstance(n, BinOp):
            left, right = ev(n.left), ev(n.right)
            if n.op == "+":
                return left + right
            if n.op == "-":
                return left - right
            if n.op == "*":
                return left * right
            if n.op == "/":
                return left / right
            if n.op == "^":
                return left**right
        raise TypeError(f"not an expression node: {n!r}")

    with np.errstate(all="ignore"):  # non-finite results are reported below
        out = ev(node)
    if out.order < order:
        out = Jet(order, out.v)
    if not all(np.all(np.isfinite(slot)) for slot in out.slots()):
        raise DomainError("expression or one of its derivatives is not finite at the point")
    return out


def eval_value(node: Expr, point: Sequence[float] = (0.0, 0.0, 0.0, 0.0), params: Mapping[str, float] | None = None) -> float:
    return float(eval_jet(node, point, params, order=1).v)
