"""Expression tree nodes and the canonical normal form.

Nodes are immutable, hashable dataclasses.  Constructors do not normalize;
:func:`normalize` maps any tree to its canonical representative, which is a
sum of monomials with exact complex-rational coefficients.  Products of sums
and positive powers of sums are expanded; a sum raised to a negative power is
kept as an atom (after pulling its leading coefficient out).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

from ..errors import SymExprError


class Expr:
    """Base class for all expression nodes.

    Arithmetic operators build raw trees and normalize the result, so
    ``a * b + c`` is always in canonical form.
    """

    __slots__ = ()

    def __add__(self, other):
        return normalize(Sum((self, as_expr(other))))

    def __radd__(self, other):
        return normalize(Sum((as_expr(other), self)))

    def __sub__(self, other):
        return normalize(Sum((self, Product((MINUS_ONE, as_expr(other))))))

    def __rsub__(self, other):
        return normalize(Sum((as_expr(other), Product((MINUS_ONE, self)))))

    def __mul__(self, other):
        return normalize(Product((self, as_expr(other))))

    def __rmul__(self, other):
        return normalize(Product((as_expr(other), self)))

    def __truediv__(self, other):
        return normalize(Product((self, Power(as_expr(other), -1))))

    def __rtruediv__(self, other):
        return normalize(Product((as_expr(other), Power(self, -1))))

    def __neg__(self):
        return normalize(Product((MINUS_ONE, self)))

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("only integer exponents are supported")
        return normalize(Power(self, n))

    def __str__(self):
        from .printer import to_string

        return to_string(self)


@dataclass(frozen=True, eq=True)
class Constant(Expr):
    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    @property
    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    @property
    def is_real(self) -> bool:
        return self.im == 0

    def add(self, other: Constant) -> Constant:
        return Constant(self.re + other.re, self.im + other.im)

    def mul(self, other: Constant) -> Constant:
        return Constant(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def inv(self) -> Constant:
        den = self.re * self.re + self.im * self.im
        if den == 0:
            raise SymExprError("division by zero constant")
        return Constant(self.re / den, -self.im / den)

    def pow(self, n: int) -> Constant:
        base = self if n >= 0 else self.inv()
        out = ONE
        for _ in range(abs(n)):
            out = out.mul(base)
        return out

    def neg(self) -> Constant:
        return Constant(-self.re, -self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))


@dataclass(frozen=True, eq=True)
class Parameter(Expr):
    name: str


@dataclass(frozen=True, eq=True)
class Coordinate(Expr):
    name: str


@dataclass(frozen=True, eq=True)
class Field(Expr):
    name: str


@dataclass(frozen=True, eq=True)
class FieldDeriv(Expr):
    field: str
    index: tuple

    def __post_init__(self):
        # mixed partials commute
        object.__setattr__(self, "index", tuple(sorted(self.index)))
        if not 1 <= len(self.index) <= 2:
            raise SymExprError("field derivatives must have order 1 or 2")

    @property
    def order(self) -> int:
        return len(self.index)


@dataclass(frozen=True, eq=True)
class ActionDensity(Expr):
    index: int


@dataclass(frozen=True, eq=True)
class OpaqueFunction(Expr):
    name: str
    arg: Expr
    order: int = 0


@dataclass(frozen=True, eq=True)
class Sum(Expr):
    terms: tuple


@dataclass(frozen=True, eq=True)
class Product(Expr):
    factors: tuple


@dataclass(frozen=True, eq=True)
class Power(Expr):
    base: Expr
    exp: int


ONE = Constant(1)
ZERO = Constant(0)
MINUS_ONE = Constant(-1)
I = Constant(0, 1)

LEAF_TYPES = (Parameter, Coordinate, Field, FieldDeriv, ActionDensity)


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not expressions")
    if isinstance(value, (int, Rational)):
        return Constant(Fraction(value))
    if isinstance(value, complex):
        raise TypeError("complex floats are not allowed inside expressions; use I")
    raise TypeError(f"cannot convert {type(value).__name__} to an expression")


# --- total order ---------------------------------------------------------------


@lru_cache(maxsize=None)
def sort_key(e: Expr) -> tuple:
    """Fixed total order over node kinds and names."""
    if isinstance(e, Constant):
        return (0, e.re, e.im)
    if isinstance(e, Parameter):
        return (1, e.name)
    if isinstance(e, Coordinate):
        return (2, e.name)
    if isinstance(e, Field):
        return (3, e.name)
    if isinstance(e, FieldDeriv):
        return (4, e.field, e.index)
    if isinstance(e, ActionDensity):
        return (5, e.index)
    if isinstance(e, OpaqueFunction):
        return (6, e.name, e.order, sort_key(e.arg))
    if isinstance(e, Power):
        return (7, sort_key(e.base), e.exp)
    if isinstance(e, Product):
        return (8, tuple(sort_key(f) for f in e.factors))
    if isinstance(e, Sum):
        return (9, tuple(sort_key(t) for t in e.terms))
    raise TypeError(f"not an expression node: {e!r}")


def _mono_key(mono: tuple) -> tuple:
    return tuple((sort_key(a), k) for a, k in mono)


def _term_key(mono: tuple) -> tuple:
    # terms carrying the highest field-derivative order come first
    fields = [a for a, _ in mono if isinstance(a, (Field, FieldDeriv))]
    if fields:
        top = max(a.order if isinstance(a, FieldDeriv) else 0 for a in fields)
    else:
        top = -1
    fields.sort(key=lambda a: (-(a.order if isinstance(a, FieldDeriv) else 0), sort_key(a)))
    return (-top, tuple(sort_key(a) for a in fields), _mono_key(mono))


# --- polynomial form -----------------------------------------------------------

# A poly is a dict mapping a monomial (sorted tuple of (atom, exponent)) to a
# nonzero Constant coefficient.


def _mono_mul(m1: tuple, m2: tuple) -> tuple:
    exps: dict = {}
    for a, k in m1:
        exps[a] = exps.get(a, 0) + k
    for a, k in m2:
        exps[a] = exps.get(a, 0) + k
    items = [(a, k) for a, k in exps.items() if k != 0]
    items.sort(key=lambda ak: sort_key(ak[0]))
    return tuple(items)


def _poly_add_into(acc: dict, poly: dict) -> None:
    for mono, c in poly.items():
        prev = acc.get(mono)
        new = c if prev is None else prev.add(c)
        if new.is_zero:
            acc.pop(mono, None)
        else:
            acc[mono] = new


def _poly_mul(p1: dict, p2: dict) -> dict:
    out: dict = {}
    for m1, c1 in p1.items():
        for m2, c2 in p2.items():
            _poly_add_into(out, {_mono_mul(m1, m2): c1.mul(c2)})
    return out


def _poly_const(c: Constant) -> dict:
    return {} if c.is_zero else {(): c}


def _to_poly(e: Expr) -> dict:
    if isinstance(e, Constant):
        return _poly_const(e)
    if isinstance(e, LEAF_TYPES):
        return {((e, 1),): ONE}
    if isinstance(e, OpaqueFunction):
        atom = OpaqueFunction(e.name, normalize(e.arg), e.order)
        return {((atom, 1),): ONE}
    if isinstance(e, Sum):
        acc: dict = {}
        for t in e.terms:
            _poly_add_into(acc, _to_poly(t))
        return acc
    if isinstance(e, Product):
        acc = {(): ONE}
        for f in e.factors:
            acc = _poly_mul(acc, _to_poly(f))
            if not acc:
                break
        return acc
    if isinstance(e, Power):
        n = e.exp
        base = _to_poly(e.base)
        if n == 0:
            return {(): ONE}
        if n > 0:
            acc = {(): ONE}
            for _ in range(n):
                acc = _poly_mul(acc, base)
            return acc
        if not base:
            raise SymExprError("division by zero")
        if len(base) == 1:
            (mono, c), = base.items()
            return {tuple((a, k * n) for a, k in mono): c.pow(n)}
        # keep the sum as an atom with a unit leading coefficient
        lead_mono = min(base, key=_term_key)
        lead = base[lead_mono]
        scaled = {m: c.mul(lead.inv()) for m, c in base.items()}
        atom = _from_poly(scaled)
        return {((atom, n),): lead.pow(n)}
    raise TypeError(f"not an expression node: {e!r}")


def _mono_expr(mono: tuple, coef: Constant) -> Expr:
    factors = [a if k == 1 else Power(a, k) for a, k in mono]
    if coef != ONE or not factors:
        factors.insert(0, coef)
    if len(factors) == 1:
        return factors[0]
    return Product(tuple(factors))


def _from_poly(poly: dict) -> Expr:
    if not poly:
        return ZERO
    monos = sorted(poly, key=_term_key)
    terms = [_mono_expr(m, poly[m]) for m in monos]
    if len(terms) == 1:
        return terms[0]
    return Sum(tuple(terms))


@lru_cache(maxsize=65536)
def normalize(e: Expr) -> Expr:
    """Return the canonical form of ``e``.

    Flattens, orders children, folds constants, expands products over sums,
    collects like terms and drops zero terms.  Idempotent.
    """
    return _from_poly(_to_poly(e))


def poly_terms(e: Expr) -> list[tuple[Constant, tuple]]:
    """Split a normalized expression into (coefficient, monomial) pairs."""
    poly = _to_poly(e)
    return [(poly[m], m) for m in sorted(poly, key=_term_key)]


def split_coefficient(term: Expr) -> tuple[Constant, Expr]:
    """Return (constant coefficient, remaining monomial) of a single term."""
    if isinstance(term, Constant):
        return term, ONE
    if isinstance(term, Product) and isinstance(term.factors[0], Constant):
        rest = term.factors[1:]
        return term.factors[0], rest[0] if len(rest) == 1 else Product(rest)
    return ONE, term


def terms_of(e: Expr) -> tuple:
    """Top-level summands of a normalized expression."""
    if isinstance(e, Sum):
        return e.terms
    if e == ZERO:
        return ()
    return (e,)


# --- traversal -----------------------------------------------------------------


def free_symbols(e: Expr) -> set:
    """All leaf symbols, including opaque-function nodes and their arguments' leaves."""
    out: set = set()
    _collect(e, out)
    return out


def _collect(e: Expr, out: set) -> None:
    if isinstance(e, LEAF_TYPES):
        out.add(e)
    elif isinstance(e, OpaqueFunction):
        out.add(e)
        _collect(e.arg, out)
    elif isinstance(e, Sum):
        for t in e.terms:
            _collect(t, out)
    elif isinstance(e, Product):
        for f in e.factors:
            _collect(f, out)
    elif isinstance(e, Power):
        _collect(e.base, out)


def substitute(e: Expr, mapping: dict) -> Expr:
    """Replace leaf symbols by expressions and normalize."""
    mapping = {k: as_expr(v) for k, v in mapping.items()}
    return normalize(_subst(e, mapping))


def _subst(e: Expr, mapping: dict) -> Expr:
    if e in mapping:
        return mapping[e]
    if isinstance(e, OpaqueFunction):
        return OpaqueFunction(e.name, _subst(e.arg, mapping), e.order)
    if isinstance(e, Sum):
        return Sum(tuple(_subst(t, mapping) for t in e.terms))
    if isinstance(e, Product):
        return Product(tuple(_subst(f, mapping) for f in e.factors))
    if isinstance(e, Power):
        return Power(_subst(e.base, mapping), e.exp)
    return e
