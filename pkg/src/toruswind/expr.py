"""Small arithmetic expression language for fields, maps and curves.

Grammar (lowest to highest precedence)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := ("-" | "+") unary | power
    power   := primary (("^" | "**") unary)?      # exponent must be constant
    primary := NUMBER | "pi" | VAR | FUNC "(" expr ("," expr)* ")" | "(" expr ")"

Variables are ``x``, ``y`` and ``t``. Named parameters (``a``, ``p`` ...) are
not part of the language; callers substitute numbers before parsing.

Evaluation is vectorized over numpy arrays. Any operation that would leave the
real domain (division by zero, log of a non-positive number, even root of a
negative number, overflow) raises :class:`DomainError` naming the offending
sub-expression instead of returning ``nan``/``inf``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "Expr",
    "Num",
    "Const",
    "Var",
    "Unary",
    "Binary",
    "Pow",
    "Call",
    "ExprError",
    "ExprSyntaxError",
    "UnknownIdentifierError",
    "DomainError",
    "parse_expr",
    "parse_pair",
    "eval_expr",
    "evaluate",
    "to_source",
    "free_variables",
]

VARIABLES = ("x", "y", "t")
CONSTANTS = {"pi": math.pi}
FUNCTIONS = {
    "sin": 1,
    "cos": 1,
    "tan": 1,
    "atan2": 2,
    "exp": 1,
    "log": 1,
    "sqrt": 1,
    "abs": 1,
}


class ExprError(ValueError):
    """Base class for parse-time failures."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, position: int, expected: str | None = None):
        self.position = position
        self.expected = expected
        detail = f"{message} at position {position}"
        if expected:
            detail += f" (expected {expected})"
        super().__init__(detail)


class UnknownIdentifierError(ExprSyntaxError):
    def __init__(self, name: str, position: int):
        self.name = name
        super().__init__(f"unknown identifier {name!r}", position)


class DomainError(ArithmeticError):
    """Evaluation left the real domain; ``node`` is the failing sub-expression."""

    def __init__(self, node: "Expr", reason: str):
        self.node = node
        self.reason = reason
        super().__init__(f"{reason} in {to_source(node)}")


# AST -----------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Expr = Union[Num, Const, Var, Unary, Binary, Pow, Call]


# Tokenizer ------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\*\*|[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(_Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("eof", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source: str, variables):
        self.tokens = _tokenize(source)
        self.i = 0
        self.variables = tuple(variables)

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> _Token:
        if self.tok.text != text or self.tok.kind == "eof":
            found = self.tok.text or "end of input"
            raise ExprSyntaxError(f"unexpected {found!r}", self.tok.pos, repr(text))
        return self.advance()

    def expect_eof(self) -> None:
        if self.tok.kind != "eof":
            raise ExprSyntaxError(f"unexpected {self.tok.text!r}", self.tok.pos, "end of input")

    def expr(self) -> Expr:
        node = self.term()
        while self.tok.text in ("+", "-") and self.tok.kind == "op":
            op = self.advance().text
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.tok.text in ("*", "/") and self.tok.kind == "op":
            op = self.advance().text
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text in ("-", "+"):
            op = self.advance().text
            operand = self.unary()
            return Unary("-", operand) if op == "-" else operand
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.tok.kind == "op" and self.tok.text in ("^", "**"):
            pos = self.advance().pos
            exponent = self.unary()
            if free_variables(exponent):
                raise ExprSyntaxError("exponent must be a numeric constant", pos)
            return Pow(base, exponent)
        return base

    def primary(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            value = float(tok.text)
            if not math.isfinite(value):
                raise ExprSyntaxError(f"number {tok.text} overflows", tok.pos)
            return Num(value)
        if tok.kind == "ident":
            self.advance()
            name = tok.text
            if name in FUNCTIONS:
                return self.call(name, tok.pos)
            if name in CONSTANTS:
                return Const(name)
            if name in self.variables:
                return Var(name)
            raise UnknownIdentifierError(name, tok.pos)
        if tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        found = tok.text or "end of input"
        raise ExprSyntaxError(f"unexpected {found!r}", tok.pos, "number, variable, function or '('")

    def call(self, name: str, pos: int) -> Call:
        self.expect("(")
        args = [self.expr()]
        while self.tok.text == ",":
            self.advance()
            args.append(self.expr())
        self.expect(")")
        if len(args) != FUNCTIONS[name]:
            raise ExprSyntaxError(f"{name} takes {FUNCTIONS[name]} argument(s), got {len(args)}", pos)
        return Call(name, tuple(args))


def parse_expr(source: str, variables=VARIABLES) -> Expr:
    """Parse ``source`` into an expression tree.

    ``variables`` restricts which of x, y, t may appear (curves use only t,
    fields only x and y).
    """
    parser = _Parser(source, variables)
    node = parser.expr()
    parser.expect_eof()
    return node


def parse_pair(source: str, variables=VARIABLES) -> tuple[Expr, Expr]:
    """Parse ``"(first, second)"`` into two expressions."""
    parser = _Parser(source, variables)
    parser.expect("(")
    first = parser.expr()
    parser.expect(",")
    second = parser.expr()
    parser.expect(")")
    parser.expect_eof()
    return first, second


# Evaluation -----------------------------------------------------------------


def free_variables(node: Expr) -> set[str]:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Unary):
        return free_variables(node.operand)
    if isinstance(node, Binary):
        return free_variables(node.left) | free_variables(node.right)
    if isinstance(node, Pow):
        return free_variables(node.base) | free_variables(node.exponent)
    if isinstance(node, Call):
        out: set[str] = set()
        for arg in node.args:
            out |= free_variables(arg)
        return out
    return set()


def _finite(node, value):
    if not np.all(np.isfinite(value)):
        raise DomainError(node, "non-finite result")
    return value


def _eval(node: Expr, env: dict):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Const):
        return CONSTANTS[node.name]
    if isinstance(node, Unary):
        return -_eval(node.operand, env)
    if isinstance(node, Binary):
        left = _eval(node.left, env)
        right = _eval(node.right, env)
        if node.op == "+":
            return _finite(node, left + right)
        if node.op == "-":
            return _finite(node, left - right)
        if node.op == "*":
            return _finite(node, left * right)
        if np.any(np.asarray(right) == 0):
            raise DomainError(node, "division by zero")
        return _finite(node, left / right)
    if isinstance(node, Pow):
        base = np.asarray(_eval(node.base, env), dtype=float)
        exponent = float(_eval(node.exponent, env))
        if exponent != math.floor(exponent) and np.any(base < 0):
            raise DomainError(node, "fractional power of a negative number")
        if exponent < 0 and np.any(base == 0):
            raise DomainError(node, "negative power of zero")
        return _finite(node, np.power(base, exponent))
    if isinstance(node, Call):
        args = [_eval(a, env) for a in node.args]
        name = node.name
        if name == "log" and np.any(np.asarray(args[0]) <= 0):
            raise DomainError(node, "log of a non-positive number")
        if name == "sqrt" and np.any(np.asarray(args[0]) < 0):
            raise DomainError(node, "square root of a negative number")
        if name == "atan2":
            return np.arctan2(args[0], args[1])
        fn = {
            "sin": np.sin,
            "cos": np.cos,
            "tan": np.tan,
            "exp": np.exp,
            "log": np.log,
            "sqrt": np.sqrt,
            "abs": np.abs,
        }[name]
        return _finite(node, fn(args[0]))
    raise TypeError(f"not an expression node: {node!r}")


def evaluate(node: Expr, x=0.0, y=0.0, t=0.0):
    """Evaluate with numpy broadcasting over ``x``, ``y`` and ``t``.

    Scalar inputs give a Python float; array inputs give an ndarray of the
    broadcast shape (constant expressions are broadcast too).
    """
    scalar = np.ndim(x) == 0 and np.ndim(y) == 0 and np.ndim(t) == 0
    env = {"x": np.asarray(x, dtype=float), "y": np.asarray(y, dtype=float), "t": np.asarray(t, dtype=float)}
    if scalar:
        env = {k: float(v) for k, v in env.items()}
    with np.errstate(all="ignore"):
        value = _eval(node, env)
    if scalar:
        return float(value)
    shape = np.broadcast_shapes(np.shape(x), np.shape(y), np.shape(t))
    return np.broadcast_to(np.asarray(value, dtype=float), shape).copy()


def eval_expr(node: Expr, point=(0.0, 0.0), t: float = 0.0) -> float:
    """Evaluate at a single point ``(x, y)`` and parameter ``t``."""
    x, y = point
    return evaluate(node, float(x), float(y), float(t))


# Printing -------------------------------------------------------------------


def to_source(node: Expr) -> str:
    """Fully parenthesized source text; re-parses to an equivalent tree."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, (Var, Const)):
        return node.name
    if isinstance(node, Unary):
        return f"(-{to_source(node.operand)})"
    if isinstance(node, Binary):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    if isinstance(node, Pow):
        return f"({to_source(node.base)} ^ {to_source(node.exponent)})"
    if isinstance(node, Call):
        return f"{node.name}({', '.join(to_source(a) for a in node.args)})"
    raise TypeError(f"not an expression node: {node!r}")
