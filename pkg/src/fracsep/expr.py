"""A small formula language for right-hand sides and coefficients.

Grammar (``^`` and ``**`` are the same right-associative power)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom (('^' | '**') unary)?
    atom   := NUMBER | NAME | FUNC '(' expr ')' | '(' expr ')'

Names are the variables ``t`` and ``x`` and the constants ``pi`` and ``e``.
Functions: sin, cos, tan, exp, log, sqrt, abs.  Compiled formulas accept
scalars or numpy arrays.
"""

from __future__ import annotations

import re

import numpy as np

__all__ = ["ExpressionError", "Formula", "parse"]

FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
}
CONSTANTS = {"pi": np.pi, "e": np.e}
VARIABLES = ("t", "x")

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>\*\*|[-+*/^()]))"
)


class ExpressionError(ValueError):
    def __init__(self, message, source="", pos=None):
        if pos is not None:
            message = f"{message} at column {pos + 1} in {source!r}"
        super().__init__(message)
        self.pos = pos


def _tokenize(src):
    tokens = []
    pos = 0
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        m = _TOKEN.match(src, pos)
        if not m:
            col = len(src) - len(src[pos:].lstrip())
            raise ExpressionError(f"unexpected character {src[col]!r}", src, col)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0
        self.used = set()

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.take()
        if text != value:
            raise ExpressionError(f"expected {value!r}, found {text or 'end of input'!r}", self.src, pos)

    def parse(self):
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ExpressionError(f"unexpected {text!r}", self.src, pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            node = _binary(op, node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs = self.unary()
            node = _binary(op, node, rhs)
        return node

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            inner = self.unary()
            return lambda env: -inner(env)
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] in ("^", "**"):
            self.take()
            exponent = self.unary()
            return lambda env: np.power(base(env), exponent(env))
        return base

    def atom(self):
        kind, text, pos = self.take()
        if kind == "num":
            value = float(text)
            return lambda env: value
        if kind == "name":
            if text in FUNCTIONS:
                fn = FUNCTIONS[text]
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return lambda env: fn(arg(env))
            if text in CONSTANTS:
                value = CONSTANTS[text]
                return lambda env: value
            if text in VARIABLES:
                self.used.add(text)
                return lambda env: env[text]
            raise ExpressionError(f"unknown name {text!r}", self.src, pos)
        if text == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ExpressionError(f"unexpected {text or 'end of input'!r}", self.src, pos)


def _binary(op, a, b):
    if op == "+":
        return lambda env: a(env) + b(env)
    if op == "-":
        return lambda env: a(env) - b(env)
    if op == "*":
        return lambda env: a(env) * b(env)
    return lambda env: np.divide(a(env), b(env))


class Formula:
    """Compiled formula; call as ``f(t)`` or ``f(t, x)``."""

    def __init__(self, source: str):
        parser = _Parser(source)
        self._fn = parser.parse()
        self.source = source
        self.variables = frozenset(parser.used)

    def __call__(self, t, x=0.0):
        with np.errstate(all="ignore"):
            out = self._fn({"t": t, "x": x})
        if np.ndim(out) == 0:
            return float(out)
        return out

    def __repr__(self):
        return f"Formula({self.source!r})"


def parse(source: str) -> Formula:
    return Formula(source)
