"""Exact partial and total derivatives of normalized expressions."""

from __future__ import annotations

from ..errors import ActionDependenceError, DerivativeOrderError, SymExprError
from .nodes import (
    LEAF_TYPES,
    ONE,
    ZERO,
    ActionDensity,
    Constant,
    Coordinate,
    Expr,
    Field,
    FieldDeriv,
    OpaqueFunction,
    Power,
    Product,
    Sum,
    free_symbols,
    normalize,
    sort_key,
)


def _d(e: Expr, sym: Expr) -> Expr:
    if e == sym:
        return ONE
    if isinstance(e, (Constant, *LEAF_TYPES)):
        return ZERO
    if isinstance(e, Sum):
        return Sum(tuple(_d(t, sym) for t in e.terms))
    if isinstance(e, Product):
        parts = []
        fs = e.factors
        for n, f in enumerate(fs):
            df = _d(f, sym)
            if df == ZERO:
                continue
            parts.append(Product(fs[:n] + (df,) + fs[n + 1:]))
        return Sum(tuple(parts)) if parts else ZERO
    if isinstance(e, Power):
        db = _d(e.base, sym)
        if db == ZERO:
            return ZERO
        return Product((Constant(e.exp), Power(e.base, e.exp - 1), db))
    if isinstance(e, OpaqueFunction):
        da = _d(e.arg, sym)
        if da == ZERO:
            return ZERO
        return Product((OpaqueFunction(e.name, e.arg, e.order + 1), da))
    raise TypeError(f"not an expression node: {e!r}")


def diff_wrt(e: Expr, sym: Expr) -> Expr:
    """Partial derivative of ``e`` with respect to the leaf ``sym``.

    All leaf symbols are independent: ``phi``, ``D(phi,t)`` and ``t`` are
    unrelated variables here.  Opaque functions obey the chain rule,
    ``d U(a)/d sym = U'(a) * d a/d sym``.
    """
    if not isinstance(sym, LEAF_TYPES):
        raise SymExprError(f"cannot differentiate with respect to {sym!r}")
    return normalize(_d(normalize(e), sym))


def total_derivative(e: Expr, coord: str) -> Expr:
    """d/d(coord) of ``e`` with fields depending on all coordinates.

    Raises DerivativeOrderError if ``e`` already holds second derivatives and
    ActionDependenceError if it depends on the action density.
    """
    e = normalize(e)
    syms = sorted(free_symbols(e), key=sort_key)
    if any(isinstance(s, ActionDensity) for s in syms):
        raise ActionDependenceError(
            f"expression differentiated by d/d{coord} depends on the action density"
        )
    parts = [diff_wrt(e, Coordinate(coord))]
    for s in syms:
        if isinstance(s, Field):
            parts.append(Product((FieldDeriv(s.name, (coord,)), diff_wrt(e, s))))
        elif isinstance(s, FieldDeriv):
            if s.order >= 2:
                raise DerivativeOrderError(
                    f"d/d{coord} of a second derivative {s.field} would exceed order 2"
                )
            parts.append(Product((FieldDeriv(s.field, s.index + (coord,)), diff_wrt(e, s))))
    return normalize(Sum(tuple(parts)))
