"""Arithmetic expressions for potentials V(x) / V(x, y).

Grammar: numbers, variables x and y, the constant pi, functions sin, cos,
exp, sqrt, abs, operators + - * / ^ and parentheses.  Precedence from
tightest to loosest: ^ (right associative), unary minus, * /, + -.
So "-x^2" parses as -(x^2) and "2^3^2" as 2^(3^2).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

FUNCTIONS = ("sin", "cos", "exp", "sqrt", "abs")
CONSTANTS = {"pi": math.pi}


class ParseError(ValueError):
    """Syntax problem; carries the character offset into the source string."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class EvalError(ValueError):
    """Numeric problem during evaluation; names the offending subexpression."""


# --- AST ------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    child: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Num | Var | Const | Neg | BinOp | Call


def print_expr(node: Node) -> str:
    """Canonical fully-parenthesized form; reparsing it gives an equal tree."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Neg):
        return f"(-{print_expr(node.child)})"
    if isinstance(node, BinOp):
        return f"({print_expr(node.left)} {node.op} {print_expr(node.right)})"
    if isinstance(node, Call):
        return f"{node.func}({print_expr(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


# --- tokenizer ------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


@dataclass(frozen=True)
class _Token:
    kind: str  # num | name | op | end
    text: str
    offset: int


def _tokenize(src: str) -> list[_Token]:
    out = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            if src[pos:].strip() == "":
                break
            bad = len(src) - len(src[pos:].lstrip())
            raise ParseError(f"unexpected character {src[bad]!r}", bad)
        for kind in ("num", "name", "op"):
            text = m.group(kind)
            if text is not None:
                out.append(_Token(kind, text, m.start(kind)))
                break
        pos = m.end()
    out.append(_Token("end", "", len(src)))
    return out


# --- parser (precedence climbing) -----------------------------------------

_BIN_PREC = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40}
_RIGHT_ASSOC = {"^"}
_UNARY_PREC = 30  # between * / and ^


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def parse(self) -> Node:
        node = self.expression(0)
        t = self.peek()
        if t.kind != "end":
            raise ParseError(f"unexpected token {t.text!r}", t.offset)
        return node

    def expression(self, min_prec: int) -> Node:
        left = self.prefix()
        while True:
            t = self.peek()
            if t.kind != "op" or t.text not in _BIN_PREC:
                break
            prec = _BIN_PREC[t.text]
            if prec < min_prec:
                break
            self.advance()
            next_min = prec if t.text in _RIGHT_ASSOC else prec + 1
            right = self.expression(next_min)
            left = BinOp(t.text, left, right)
        return left

    def prefix(self) -> Node:
        t = self.peek()
        if t.kind == "op" and t.text == "-":
            self.advance()
            return Neg(self.expression(_UNARY_PREC))
        if t.kind == "op" and t.text == "+":
            # tolerate a leading plus
            self.advance()
            return self.expression(_UNARY_PREC)
        return self.atom()

    def atom(self) -> Node:
        t = self.advance()
        if t.kind == "num":
            return Num(float(t.text))
        if t.kind == "name":
            if t.text in FUNCTIONS:
                opener = self.peek()
                if not (opener.kind == "op" and opener.text == "("):
                    raise ParseError(f"function {t.text!r} needs parentheses", t.offset)
                self.advance()
                arg = self.expression(0)
                closer = self.peek()
                if not (closer.kind == "op" and closer.text == ")"):
                    raise ParseError("unbalanced parentheses", t.offset)
                self.advance()
                return Call(t.text, arg)
            if t.text in CONSTANTS:
                return Const(t.text)
            if t.text in ("x", "y"):
                return Var(t.text)
            raise ParseError(f"unknown identifier {t.text!r}", t.offset)
        if t.kind == "op" and t.text == "(":
            inner = self.expression(0)
            closer = self.peek()
            if not (closer.kind == "op" and closer.text == ")"):
                raise ParseError("unbalanced parentheses", t.offset)
            self.advance()
            return inner
        if t.kind == "end":
            raise ParseError("unexpected end of expression", t.offset)
        raise ParseError(f"unexpected token {t.text!r}", t.offset)


def parse_potential(src: str) -> Node:
    """Parse an expression string into an AST."""
    if not isinstance(src, str) or src.strip() == "":
        raise ParseError("empty expression", 0)
    return _Parser(src).parse()


# --- evaluation -----------------------------------------------------------

_NP_FUNCS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "sqrt": np.sqrt, "abs": np.abs}


def _eval(node: Node, env: dict):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Const):
        return CONSTANTS[node.name]
    if isinstance(node, Var):
        if node.name not in env:
            raise EvalError(f"variable {node.name!r} is not defined on this grid")
        return env[node.name]
    if isinstance(node, Neg):
        return -_eval(node.child, env)
    if isinstance(node, Call):
        v = _eval(node.arg, env)
        if node.func == "sqrt" and np.any(np.asarray(v) < 0):
            raise EvalError(f"square root of a negative value in {print_expr(node)}")
        return _NP_FUNCS[node.func](v)
    if isinstance(node, BinOp):
        a = _eval(node.left, env)
        b = _eval(node.right, env)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            if np.any(np.asarray(b) == 0):
                raise EvalError(f"division by zero in {print_expr(node)}")
            return a / b
        if node.op == "^":
            bb = np.asarray(b)
            if np.any(np.asarray(a) < 0) and np.any(bb != np.round(bb)):
                raise EvalError(
                    f"negative base with non-integer exponent in {print_expr(node)}")
            return a ** b
    raise TypeError(f"not an expression node: {node!r}")


def eval_potential(expr: Node, point) -> float:
    """Evaluate at a single point (scalar for 1D, pair for 2D)."""
    pt = np.atleast_1d(np.asarray(point, dtype=float))
    env = {"x": float(pt[0])}
    if pt.size > 1:
        env["y"] = float(pt[1])
    out = _eval(expr, env)
    val = float(out)
    if not math.isfinite(val):
        raise EvalError(f"non-finite result from {print_expr(expr)}")
    return val


def eval_on_grid(expr: Node, grid) -> np.ndarray:
    """Vectorized evaluation on all grid points."""
    coords = grid.coords()
    env = {"x": coords[0]}
    if grid.dim == 2:
        env["y"] = coords[1]
    with np.errstate(all="ignore"):
        out = np.broadcast_to(np.asarray(_eval(expr, env), dtype=float), grid.shape).copy()
    if not np.all(np.isfinite(out)):
        raise EvalError(f"non-finite result from {print_expr(expr)}")
    return out
