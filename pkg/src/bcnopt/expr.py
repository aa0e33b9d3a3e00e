"""Boolean expressions: parsing, evaluation and structure matrices.

Grammar (all binary operators left-associative, loosest first)::

    expr    := xor ('|' xor)*
    xor     := conj ('^' conj)*
    conj    := unary ('&' unary)*
    unary   := '!' unary | atom
    atom    := IDENT | '0' | '1' | '(' expr ')'
    IDENT   := [A-Za-z_][A-Za-z0-9_+-]*

Identifiers may carry ``+``/``-`` characters so that names such as ``Ara+``
and ``Ara-`` can be written verbatim.  Whitespace is insignificant.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import ExprSyntaxError, UnboundVariableError
from .stp import LogicalMatrix

__all__ = [
    "Var",
    "Const",
    "Not",
    "BinOp",
    "BoolExpr",
    "parse_expr",
    "eval_expr",
    "eval_array",
    "expr_variables",
    "format_expr",
    "structure_matrix",
]


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Not:
    operand: "BoolExpr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of '&', '^', '|'
    left: "BoolExpr"
    right: "BoolExpr"


BoolExpr = Union[Var, Const, Not, BinOp]

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<ident>[A-Za-z_][A-Za-z0-9_+\-]*)"
    r"|(?P<const>[01])(?![A-Za-z0-9_])"
    r"|(?P<op>[!&^|()])"
    r")"
)

# binding strength of binary operators
_PRECEDENCE = {"|": 1, "^": 2, "&": 3}


def _tokenize(text):
    tokens = []
    pos = 0
    end = len(text.rstrip())
    while pos < end:
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExprSyntaxError(f"unknown token {text[start]!r}", start)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", end))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self):
        tree = self.binary(1)
        kind, value, pos = self.peek()
        if kind != "end":
            if value == ")":
                raise ExprSyntaxError("unbalanced ')'", pos)
            raise ExprSyntaxError(f"unexpected {value!r}", pos)
        return tree

    def binary(self, level):
        if level > 3:
            return self.unary()
        left = self.binary(level + 1)
        while True:
            kind, value, _ = self.peek()
            if kind != "op" or _PRECEDENCE.get(value) != level:
                return left
            self.take()
            left = BinOp(value, left, self.binary(level + 1))

    def unary(self):
        kind, value, pos = self.take()
        if kind == "op" and value == "!":
            return Not(self.unary())
        if kind == "ident":
            return Var(value)
        if kind == "const":
            return Const(value == "1")
        if kind == "op" and value == "(":
            inner = self.binary(1)
            k2, v2, p2 = self.take()
            if v2 != ")":
                raise ExprSyntaxError("unbalanced '(' (missing ')')", p2)
            return inner
        if kind == "end":
            raise ExprSyntaxError("unexpected end of expression", pos)
        raise ExprSyntaxError(f"unexpected {value!r}", pos)


def parse_expr(text: str) -> BoolExpr:
    """Parse ``text`` into an expression tree.

    >>> parse_expr("(Aem & T) | Ae")
    BinOp(op='|', left=BinOp(op='&', left=Var(name='Aem'), right=Var(name='T')), right=Var(name='Ae'))
    """
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    return _Parser(text).parse()


def eval_expr(e: BoolExpr, env: Mapping[str, bool | int]) -> bool:
    if isinstance(e, Var):
        try:
            return bool(env[e.name])
        except KeyError:
            raise UnboundVariableError(e.name) from None
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Not):
        return not eval_expr(e.operand, env)
    a = eval_expr(e.left, env)
    b = eval_expr(e.right, env)
    if e.op == "&":
        return a and b
    if e.op == "|":
        return a or b
    return a != b


def eval_array(e: BoolExpr, env: Mapping[str, np.ndarray]) -> np.ndarray:
    """Evaluate ``e`` elementwise over boolean arrays of a common shape."""
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise UnboundVariableError(e.name) from None
    if isinstance(e, Const):
        shape = np.shape(next(iter(env.values()))) if env else ()
        return np.full(shape, e.value, dtype=bool)
    if isinstance(e, Not):
        return ~eval_array(e.operand, env)
    a = eval_array(e.left, env)
    b = eval_array(e.right, env)
    if e.op == "&":
        return a & b
    if e.op == "|":
        return a | b
    return a ^ b


def expr_variables(e: BoolExpr) -> tuple[str, ...]:
    """Variable names in order of first appearance."""
    seen: dict[str, None] = {}
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            seen.setdefault(node.name)
        elif isinstance(node, Not):
            stack.append(node.operand)
        elif isinstance(node, BinOp):
            stack.append(node.right)
            stack.append(node.left)
    return tuple(seen)


def format_expr(e: BoolExpr) -> str:
    """Render ``e`` in the input grammar with minimal parentheses."""
    return _fmt(e, 0)


def _fmt(e, parent):
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Const):
        return "1" if e.value else "0"
    if isinstance(e, Not):
        return "!" + _fmt(e.operand, 4)
    level = _PRECEDENCE[e.op]
    # right operand of a left-associative chain needs parens at equal level
    s = f"{_fmt(e.left, level)} {e.op} {_fmt(e.right, level + 1)}"
    return f"({s})" if level < parent else s


def structure_matrix(e: BoolExpr, ordered_vars: Sequence[str]) -> LogicalMatrix:
    """Structure matrix ``M_f`` in ``L_{2 x 2^k}`` of ``e`` over ``ordered_vars``.

    Column ``encode_state(bits).index`` holds ``delta_2^{1 + f(bits)}``.
    """
    k = len(ordered_vars)
    codes = np.arange(1 << k)
    env = {name: ((codes >> (k - 1 - j)) & 1).astype(bool)
           for j, name in enumerate(ordered_vars)}
    if k == 0:
        value = np.array([eval_expr(e, {})])
    else:
        value = np.broadcast_to(eval_array(e, env), codes.shape)
    return LogicalMatrix(2, value.astype(np.int64) + 1)
