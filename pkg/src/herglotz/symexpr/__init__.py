"""Symbolic expression core: parse, differentiate, normalize, compare."""

from .calculus import diff_wrt, total_derivative
from .evaluate import equivalent, evaluate, lambdify
from .nodes import (
    I,
    ONE,
    ZERO,
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
    as_expr,
    free_symbols,
    normalize,
    poly_terms,
    sort_key,
    split_coefficient,
    substitute,
    terms_of,
)
from .parser import ParseContext, parse
from .printer import format_constant, to_string

__all__ = [
    "ActionDensity",
    "Constant",
    "Coordinate",
    "Expr",
    "Field",
    "FieldDeriv",
    "I",
    "ONE",
    "OpaqueFunction",
    "Parameter",
    "ParseContext",
    "Power",
    "Product",
    "Sum",
    "ZERO",
    "as_expr",
    "diff_wrt",
    "equivalent",
    "evaluate",
    "format_constant",
    "free_symbols",
    "lambdify",
    "normalize",
    "parse",
    "poly_terms",
    "sort_key",
    "split_coefficient",
    "substitute",
    "terms_of",
    "to_string",
    "total_derivative",
]
