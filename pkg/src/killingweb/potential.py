"""Parser for rational potentials V(x, y, z).

Grammar (whitespace is ignored)::

    expr     := term (("+" | "-") term)*
    term     := unary (("*" | "/") unary)*
    unary    := "-" unary | "+" unary | power
    power    := atom ("^" unary)?          # right associative, exponent must be an integer
    atom     := INTEGER | IDENT | "(" expr ")"
    INTEGER  := [0-9]+
    IDENT    := [A-Za-z_][A-Za-z0-9_]*

``x``, ``y`` and ``z`` are the coordinates; any other identifier is a named
constant that must be bound to a positive rational.  Decimal literals are
rejected so that everything downstream stays exact.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union

from .exactmath import Poly, RatFun, UsageError, as_rational

XYZ = ("x", "y", "z")


class ParseError(UsageError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


@dataclass(frozen=True)
class Num:
    value: int
    pos: int


@dataclass(frozen=True)
class Var:
    name: str
    pos: int


@dataclass(frozen=True)
class Const:
    name: str
    pos: int


@dataclass(frozen=True)
class Neg:
    operand: "Node"
    pos: int


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"
    pos: int


Node = Union[Num, Var, Const, Neg, BinOp]

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\S))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    raw = text.encode("utf-8")
    toks = []
    pos = 0
    while True:
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        start = m.start(m.lastindex)
        byte_off = len(text[:start].encode("utf-8"))
        if m.group(1) is not None:
            if text[m.end():m.end() + 1] == ".":
                raise ParseError("floating-point literals are not accepted", byte_off)
            toks.append(("num", m.group(1), byte_off))
        elif m.group(2) is not None:
            toks.append(("id", m.group(2), byte_off))
        else:
            ch = m.group(3)
            if ch not in "+-*/^()":
                raise ParseError(f"unexpected character {ch!r}", byte_off)
            toks.append(("op", ch, byte_off))
        pos = m.end()
    toks.append(("end", "", len(raw)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value: str):
        kind, v, pos = self.take()
        if kind != "op" or v != value:
            raise ParseError(f"expected {value!r}", pos)

    def parse(self) -> Node:
        node = self.expr()
        kind, v, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {v!r}", pos)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            _, op, pos = self.take()
            node = BinOp(op, node, self.term(), pos)
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            _, op, pos = self.take()
            node = BinOp(op, node, self.unary(), pos)
        return node

    def unary(self) -> Node:
        kind, v, pos = self.peek()
        if kind == "op" and v in "+-":
            self.take()
            operand = self.unary()
            return Neg(operand, pos) if v == "-" else operand
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        kind, v, pos = self.peek()
        if kind == "op" and v == "^":
            self.take()
            return BinOp("^", base, self.unary(), pos)
        return base

    def atom(self) -> Node:
        kind, v, pos = self.take()
        if kind == "num":
            return Num(int(v), pos)
        if kind == "id":
            return Var(v, pos) if v in XYZ else Const(v, pos)
        if kind == "op" and v == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            raise ParseError("unexpected end of input", pos)
        raise ParseError(f"unexpected token {v!r}", pos)


def parse_ast(text: str) -> Node:
    return _Parser(text).parse()


def parse_potential(text: str, constants: Mapping[str, object] | None = None) -> RatFun:
    """Parse ``text`` into a reduced RatFun over (x, y, z)."""
    consts = {k: as_rational(v) for k, v in (constants or {}).items()}
    for k, v in consts.items():
        if v <= 0:
            raise UsageError(f"constant {k} must be positive")
    return _evaluate(parse_ast(text), consts)


def _evaluate(node: Node, consts: Mapping[str, object]) -> RatFun:
    if isinstance(node, Num):
        return RatFun.const(XYZ, node.value)
    if isinstance(node, Var):
        return RatFun(Poly.var(XYZ, node.name))
    if isinstance(node, Const):
        if node.name not in consts:
            raise ParseError(f"unbound constant {node.name!r}", node.pos)
        return RatFun.const(XYZ, consts[node.name])
    if isinstance(node, Neg):
        return -_evaluate(node.operand, consts)
    left = _evaluate(node.left, consts)
    right = _evaluate(node.right, consts)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        if right.is_zero():
            raise ParseError("denominator is identically zero", node.pos)
        return left / right
    # power
    if not right.is_polynomial() or not right.num.is_constant():
        raise ParseError("exponent must be an integer constant", node.pos)
    e = Fraction(right.num.constant_value())
    if e.denominator != 1:
        raise ParseError("non-integer exponent", node.pos)
    if e < 0 and left.is_zero():
        raise ParseError("negative power of zero", node.pos)
    return left ** int(e)


def parse_const_binding(spec: str) -> tuple[str, object]:
    """Parse one ``name=p/q`` binding."""
    if "=" not in spec:
        raise UsageError(f"constant binding must look like name=p/q, got {spec!r}")
    name, value = spec.split("=", 1)
    name = name.strip()
    if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name) or name in XYZ:
        raise UsageError(f"invalid constant name {name!r}")
    return name, as_rational(value)
