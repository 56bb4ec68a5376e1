"""Numerical evaluation and randomized equivalence testing."""

from __future__ import annotations

import cmath
from collections.abc import Callable, Mapping, Sequence

import numpy as np

from ..errors import EvaluationDomainError, UnboundSymbol
from .nodes import (
    LEAF_TYPES,
    Constant,
    Expr,
    OpaqueFunction,
    Power,
    Product,
    Sum,
    free_symbols,
    normalize,
    sort_key,
)


def _resolve(node: Expr, bindings: Mapping):
    """Look up the value bound to a leaf; opaque functions may bind callables."""
    if node in bindings:
        return bindings[node]
    if isinstance(node, OpaqueFunction):
        key = (node.name, node.order)
        if key in bindings:
            return bindings[key]
        if node.name in bindings:
            table = bindings[node.name]
            if callable(table):
                return lambda arg, f=table, n=node.order: f(arg, n)
            if node.order < len(table):
                return table[node.order]
        raise UnboundSymbol(f"no binding for {node.name}{chr(39) * node.order}")
    name = getattr(node, "name", None)
    if isinstance(name, str) and name in bindings:
        return bindings[name]
    from .printer import to_string

    raise UnboundSymbol(f"no binding for {to_string(node)}")


class _Codegen:
    def __init__(self, args: Sequence, bindings: Mapping):
        self.argnames = {a: f"a{k}" for k, a in enumerate(args)}
        self.bindings = bindings
        self.namespace: dict = {}
        self._names: dict = {}

    def _bind(self, node: Expr, value) -> str:
        if node not in self._names:
            name = f"b{len(self._names)}"
            self._names[node] = name
            self.namespace[name] = value
        return self._names[node]

    def gen(self, e: Expr) -> str:
        if e in self.argnames:
            return self.argnames[e]
        if isinstance(e, Constant):
            if e.im == 0:
                return repr(float(e.re))
            return f"complex({float(e.re)!r}, {float(e.im)!r})"
        if isinstance(e, Sum):
            return "(" + " + ".join(self.gen(t) for t in e.terms) + ")"
        if isinstance(e, Product):
            return "(" + " * ".join(self.gen(f) for f in e.factors) + ")"
        if isinstance(e, Power):
            base = self.gen(e.base)
            if e.exp < 0:
                return f"(1.0 / ({base})**{-e.exp})"
            return f"({base})**{e.exp}"
        if isinstance(e, OpaqueFunction):
            value = _resolve(e, self.bindings)
            name = self._bind(e, value)
            if callable(value):
                return f"{name}({self.gen(e.arg)})"
            return name
        if isinstance(e, LEAF_TYPES):
            return self._bind(e, _resolve(e, self.bindings))
        raise TypeError(f"not an expression node: {e!r}")


def lambdify(e: Expr, args: Sequence = (), bindings: Mapping | None = None) -> Callable:
    """Compile ``e`` to a Python function of the leaves listed in ``args``.

    Every other leaf must be bound in ``bindings``: keys are leaf nodes or
    bare names; opaque functions may be bound by node, ``(name, order)``, or
    name (a list indexed by derivative order, or a callable ``f(arg, order)``).
    The compiled function works elementwise on numpy arrays.
    """
    gen = _Codegen(args, bindings or {})
    body = gen.gen(normalize(e))
    params = ", ".join(gen.argnames[a] for a in args)
    code = f"lambda {params}: {body}"
    return eval(code, gen.namespace)  # noqa: S307 - generated from our own tree


def evaluate(e: Expr, bindings: Mapping):
    """Evaluate ``e`` with every leaf taken from ``bindings``."""
    return lambdify(e, (), bindings)()


def _close(x: complex, y: complex, tol: float) -> bool:
    return abs(x - y) <= tol * (1.0 + max(abs(x), abs(y)))


def equivalent(
    a: Expr,
    b: Expr,
    trials: int = 64,
    seed: int = 0,
    tol: float = 1e-9,
    max_retries: int = 32,
) -> bool:
    """Randomized identity test.

    Samples every leaf (opaque functions at each order included) uniformly from
    the complex box [-2, 2] x [-2, 2] with a seeded generator and compares
    values with a mixed absolute/relative tolerance.  Samples that hit a pole
    are redrawn, up to ``max_retries`` per trial.
    """
    if trials < 16:
        raise ValueError("equivalent() needs at least 16 trials")
    syms = sorted(free_symbols(a) | free_symbols(b), key=sort_key)
    fa = lambdify(a, syms)
    fb = lambdify(b, syms)
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        for _attempt in range(max_retries):
            draw = rng.uniform(-2.0, 2.0, size=(len(syms), 2))
            point = [complex(re, im) for re, im in draw]
            try:
                va = complex(fa(*point))
                vb = complex(fb(*point))
            except (ZeroDivisionError, OverflowError):
                continue
            if cmath.isfinite(va) and cmath.isfinite(vb):
                break
        else:
            raise EvaluationDomainError("could not find a finite sample point")
        if not _close(va, vb, tol):
            return False
    return True
