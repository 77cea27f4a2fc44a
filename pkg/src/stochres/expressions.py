"""Tiny arithmetic expression grammar for user-defined noise coefficients.

Grammar (identifiers: the single variable ``x``; functions: exp, tanh):

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          right associative
    atom   := NUMBER | 'x' | FUNC '(' expr ')' | '(' expr ')'

Compiled expressions evaluate with numpy semantics, so they accept scalars
and arrays alike.  No eval() is involved.
"""
from __future__ import annotations

import re
from typing import Callable

import numpy as np

__all__ = ["ExpressionError", "compile_expression"]


class ExpressionError(ValueError):
    """Malformed coefficient expression."""


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)

_FUNCTIONS: dict[str, Callable] = {"exp": np.exp, "tanh": np.tanh}


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens: list[tuple[str, str]] = []
    text = text.strip()
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExpressionError(f"unexpected character {text[pos]!r} at position {pos}")
        if m.lastgroup is not None:
            tokens.append((m.lastgroup, m.group(m.lastgroup)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens: list[tuple[str, str]], source: str):
        self.tokens = tokens
        self.pos = 0
        self.source = source

    def peek(self) -> tuple[str, str] | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> tuple[str, str]:
        tok = self.peek()
        if tok is None:
            raise ExpressionError(f"unexpected end of expression in {self.source!r}")
        self.pos += 1
        return tok

    def expect_op(self, op: str) -> None:
        tok = self.take()
        if tok != ("op", op):
            raise ExpressionError(f"expected {op!r}, found {tok[1]!r} in {self.source!r}")

    def parse(self) -> Callable:
        node = self.expr()
        if self.peek() is not None:
            raise ExpressionError(f"trailing input {self.peek()[1]!r} in {self.source!r}")
        return node

    def expr(self) -> Callable:
        node = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            node = _binary(np.add if op == "+" else np.subtract, node, rhs)
        return node

    def term(self) -> Callable:
        node = self.unary()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            rhs = self.unary()
            node = _binary(np.multiply if op == "*" else np.divide, node, rhs)
        return node

    def unary(self) -> Callable:
        if self.peek() == ("op", "-"):
            self.take()
            inner = self.unary()
            return lambda x: np.negative(inner(x))
        return self.power()

    def power(self) -> Callable:
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            exponent = self.unary()
            return _binary(np.power, base, exponent)
        return base

    def atom(self) -> Callable:
        kind, text = self.take()
        if kind == "num":
            value = float(text)
            return lambda x: value
        if kind == "name":
            if text == "x":
                return lambda x: np.asarray(x, dtype=float)
            fn = _FUNCTIONS.get(text)
            if fn is None:
                raise ExpressionError(f"unknown identifier {text!r} in {self.source!r}")
            self.expect_op("(")
            arg = self.expr()
            self.expect_op(")")
            return lambda x: fn(arg(x))
        if (kind, text) == ("op", "("):
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExpressionError(f"unexpected token {text!r} in {self.source!r}")


def _binary(op: Callable, lhs: Callable, rhs: Callable) -> Callable:
    return lambda x: op(lhs(x), rhs(x))


def compile_expression(text: str) -> Callable:
    """Compile a coefficient expression into a callable of x.

    The result preserves scalar-in scalar-out behavior while broadcasting
    over numpy arrays.
    """
    if not text or not text.strip():
        raise ExpressionError("empty expression")
    node = _Parser(_tokenize(text), text).parse()

    def fn(x):
        out = np.asarray(node(x), dtype=float)
        if out.ndim == 0 and np.ndim(x) == 0:
            return float(out)
        return np.broadcast_to(out, np.shape(x)).copy() if out.shape != np.shape(x) else out

    return fn
