"""Pratt parser for the Lagrangian expression language.

Grammar summary::

    expr   := expr ('+'|'-'|'*'|'/') expr | '-' expr | expr '^' expr
            | '(' expr ')' | number | identifier | call
    call   := 'D' '(' field ',' coord [',' coord] ')'
            | fname "'"* '(' expr ')'

``i`` is the imaginary unit, ``s0``..``s{d-1}`` are action-density
components and decimal literals are converted to exact rationals.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import DerivativeOfNonField, ParseError, UndeclaredIdentifier
from .nodes import (
    I,
    MINUS_ONE,
    ActionDensity,
    Constant,
    Coordinate,
    Expr,
    Field,
    FieldDeriv,
    OpaqueFunction,
    Parameter,
    Power,
    Product,
    Sum,
    normalize,
)

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*'*)"
    r"|(?P<op>[-+*/^(),]))"
)
_ACTION = re.compile(r"s(\d+)$")

_BP = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40}
_UNARY_BP = 30


@dataclass(frozen=True)
class ParseContext:
    """Out-of-band declarations for the parser.

    ``parameters=None`` means any identifier that is not otherwise declared is
    taken to be a parameter.
    """

    coords: tuple = ()
    fields: tuple = ()
    parameters: tuple | None = None
    functions: tuple = ("U", "V")
    action_alias: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        object.__setattr__(self, "fields", tuple(self.fields))
        if self.parameters is not None:
            object.__setattr__(self, "parameters", tuple(self.parameters))
        object.__setattr__(self, "functions", tuple(self.functions))


@dataclass
class _Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            stripped = len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[pos + stripped]!r}", pos + stripped)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append(_Token(kind, m.group(kind), start))
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


@dataclass
class _Parser:
    tokens: list
    ctx: ParseContext
    i: int = 0
    _seen: set = field(default_factory=set)

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.next()
        if tok.text != text or tok.kind == "end":
            found = "end of input" if tok.kind == "end" else repr(tok.text)
            raise ParseError(f"expected {text!r}, found {found}", tok.pos)
        return tok

    def expr(self, rbp: int = 0) -> Expr:
        tok = self.next()
        left = self.nud(tok)
        while True:
            op = self.peek()
            if op.kind != "op" or op.text not in _BP or _BP[op.text] <= rbp:
                break
            self.next()
            left = self.led(op, left)
        return left

    def nud(self, tok: _Token) -> Expr:
        if tok.kind == "num":
            return Constant(Fraction(tok.text))
        if tok.kind == "name":
            return self.identifier(tok)
        if tok.kind == "op" and tok.text == "-":
            return Product((MINUS_ONE, self.expr(_UNARY_BP)))
        if tok.kind == "op" and tok.text == "+":
            return self.expr(_UNARY_BP)
        if tok.kind == "op" and tok.text == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ParseError(f"unexpected {found}", tok.pos)

    def led(self, op: _Token, left: Expr) -> Expr:
        if op.text == "+":
            return Sum((left, self.expr(_BP["+"])))
        if op.text == "-":
            return Sum((left, Product((MINUS_ONE, self.expr(_BP["-"])))))
        if op.text == "*":
            return Product((left, self.expr(_BP["*"])))
        if op.text == "/":
            return Product((left, Power(self.expr(_BP["/"]), -1)))
        # '^' is right associative
        pos = self.peek().pos
        exponent = normalize(self.expr(_BP["^"] - 1))
        if (
            not isinstance(exponent, Constant)
            or exponent.im != 0
            or exponent.re.denominator != 1
        ):
            raise ParseError("exponent must be an integer constant", pos)
        return Power(left, int(exponent.re))

    def identifier(self, tok: _Token) -> Expr:
        name = tok.text
        ctx = self.ctx
        primes = len(name) - len(name.rstrip("'"))
        base = name.rstrip("'")
        followed_by_call = self.peek().text == "(" and self.peek().kind == "op"
        if primes and base not in ctx.functions:
            raise ParseError(f"primes are only allowed on functions, not {base!r}", tok.pos)
        if base == "D" and followed_by_call and "D" not in ctx.fields:
            return self.derivative(tok)
        if base in ctx.functions and followed_by_call:
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return OpaqueFunction(base, arg, primes)
        if base in ctx.functions:
            raise ParseError(f"function {base!r} must be applied to an argument", tok.pos)
        if base == "i":
            return I
        if ctx.action_alias is not None and base == ctx.action_alias:
            return ActionDensity(0)
        if base in ctx.coords:
            return Coordinate(base)
        if base in ctx.fields:
            return Field(base)
        m = _ACTION.match(base)
        if m:
            index = int(m.group(1))
            if index >= max(len(ctx.coords), 1):
                raise UndeclaredIdentifier(
                    f"action-density component {base!r} exceeds dimension {len(ctx.coords)}",
                    tok.pos,
                )
            return ActionDensity(index)
        if ctx.parameters is None or base in ctx.parameters:
            return Parameter(base)
        raise UndeclaredIdentifier(f"undeclared identifier {base!r}", tok.pos)

    def derivative(self, tok: _Token) -> Expr:
        self.expect("(")
        ftok = self.next()
        if ftok.kind != "name":
            raise ParseError("expected a field name in D(...)", ftok.pos)
        if ftok.text not in self.ctx.fields:
            if (
                ftok.text in self.ctx.coords
                or ftok.text == "i"
                or self.ctx.parameters is None
                or ftok.text in self.ctx.parameters
                or _ACTION.match(ftok.text)
            ):
                raise DerivativeOfNonField(f"cannot differentiate non-field {ftok.text!r}", ftok.pos)
            raise UndeclaredIdentifier(f"undeclared identifier {ftok.text!r}", ftok.pos)
        index = []
        while self.peek().text == ",":
            self.next()
            ctok = self.next()
            if ctok.kind != "name" or ctok.text not in self.ctx.coords:
                raise UndeclaredIdentifier(f"undeclared coordinate {ctok.text!r}", ctok.pos)
            index.append(ctok.text)
        self.expect(")")
        if not 1 <= len(index) <= 2:
            raise ParseError("D(...) takes one or two coordinates", tok.pos)
        return FieldDeriv(ftok.text, tuple(index))


def parse(text: str, ctx: ParseContext | None = None) -> Expr:
    """Parse ``text`` into a normalized expression."""
    ctx = ctx or ParseContext()
    parser = _Parser(tokenize(text), ctx)
    if parser.peek().kind == "end":
        raise ParseError("empty expression", 0)
    tree = parser.expr()
    tail = parser.peek()
    if tail.kind != "end":
        raise ParseError(f"unexpected {tail.text!r}", tail.pos)
    return normalize(tree)
