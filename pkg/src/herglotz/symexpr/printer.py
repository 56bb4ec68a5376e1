"""Render expressions in the concrete grammar accepted by the parser."""

from __future__ import annotations

from fractions import Fraction

from .nodes import (
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
)


def _frac(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _is_negative(c: Constant) -> bool:
    return c.re < 0 or (c.re == 0 and c.im < 0)


def format_constant(c: Constant) -> str:
    if c.im == 0:
        return _frac(c.re)
    if c.re == 0:
        mag = abs(c.im)
        sign = "-" if c.im < 0 else ""
        if mag == 1:
            return f"{sign}i"
        if mag.denominator == 1:
            return f"{sign}{mag.numerator}*i"
        return f"{sign}{mag.numerator}*i/{mag.denominator}"
    im = abs(c.im)
    op = "-" if c.im < 0 else "+"
    im_txt = "i" if im == 1 else f"{_frac(im)}*i"
    return f"({_frac(c.re)} {op} {im_txt})"


def _atom(e: Expr) -> str:
    if isinstance(e, (Parameter, Coordinate, Field)):
        return e.name
    if isinstance(e, FieldDeriv):
        return f"D({e.field},{','.join(e.index)})"
    if isinstance(e, ActionDensity):
        return f"s{e.index}"
    if isinstance(e, OpaqueFunction):
        return f"{e.name}{chr(39) * e.order}({to_string(e.arg)})"
    if isinstance(e, Sum):
        return f"({to_string(e)})"
    if isinstance(e, Constant):
        txt = format_constant(e)
        return f"({txt})" if txt.startswith("-") else txt
    return f"({to_string(e)})"


def _power(base: Expr, k: int) -> str:
    txt = _atom(base)
    return txt if k == 1 else f"{txt}^{k}"


def _product(coef: Constant, factors: list[tuple[Expr, int]]) -> str:
    sign = ""
    if _is_negative(coef):
        sign = "-"
        coef = coef.neg()
    num: list[str] = []
    den: list[str] = []
    if coef.im == 0:
        if coef.re.numerator != 1:
            num.append(str(coef.re.numerator))
        if coef.re.denominator != 1:
            den.append(str(coef.re.denominator))
    elif coef.re == 0:
        q = coef.im
        if q.numerator != 1:
            num.append(str(q.numerator))
        num.append("i")
        if q.denominator != 1:
            den.append(str(q.denominator))
    else:
        num.append(format_constant(coef))
    for base, k in factors:
        if k > 0:
            num.append(_power(base, k))
        else:
            den.append(_power(base, -k))
    text = "*".join(num) if num else "1"
    if den:
        text += "/" + (den[0] if len(den) == 1 else "(" + "*".join(den) + ")")
    return sign + text


def _split(e: Expr) -> tuple[Constant, list[tuple[Expr, int]]]:
    items = e.factors if isinstance(e, Product) else (e,)
    coef = Constant(1)
    factors = []
    for f in items:
        if isinstance(f, Constant):
            coef = coef.mul(f)
        elif isinstance(f, Power):
            factors.append((f.base, f.exp))
        else:
            factors.append((f, 1))
    return coef, factors


def _term(e: Expr) -> tuple[bool, str]:
    """Return (negative, text of the magnitude) for a summand."""
    if isinstance(e, Constant):
        if _is_negative(e):
            return True, format_constant(e.neg())
        return False, format_constant(e)
    coef, factors = _split(e)
    if _is_negative(coef):
        return True, _product(coef.neg(), factors)
    return False, _product(coef, factors)


def to_string(e: Expr) -> str:
    """Print ``e`` so that parsing the result yields ``e`` back (when normalized)."""
    if isinstance(e, Sum):
        parts = []
        for n, t in enumerate(e.terms):
            neg, txt = _term(t)
            if n == 0:
                parts.append(("-" if neg else "") + txt)
            else:
                parts.append((" - " if neg else " + ") + txt)
        return "".join(parts)
    if isinstance(e, Constant):
        return format_constant(e)
    if isinstance(e, (Product, Power)):
        neg, txt = _term(e)
        return ("-" if neg else "") + txt
    return _atom(e)
