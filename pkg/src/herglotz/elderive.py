"""Generalized Euler-Lagrange equations for action-dependent Lagrangians.

For a density L(x, phi, d phi, s) whose action-density sensitivities
gamma_mu = dL/ds^mu are constants, every field obeys

    dL/dphi - d/dx^mu (dL/d(d_mu phi)) + gamma_mu dL/d(d_mu phi) = 0.

The one-dimensional Herglotz problem is the special case d = 1 with the
action S playing the role of s^0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import DerivativeOrderError, NonConstantGamma, ProblemFormatError
from .symexpr import (
    ZERO,
    ActionDensity,
    Constant,
    Coordinate,
    Expr,
    Field,
    FieldDeriv,
    OpaqueFunction,
    ParseContext,
    Product,
    Sum,
    diff_wrt,
    format_constant,
    free_symbols,
    normalize,
    parse,
    poly_terms,
    sort_key,
    split_coefficient,
    substitute,
    terms_of,
    to_string,
    total_derivative,
)

FIELD_DENSITY = "field-density"
ODE_WITH_ACTION = "ode-with-action"
KINDS = (FIELD_DENSITY, ODE_WITH_ACTION)


@dataclass(frozen=True)
class FieldSpec:
    name: str
    conjugate_of: str | None = None


@dataclass(frozen=True)
class VariationalProblem:
    """Coordinates, fields and a Lagrangian; the input of the derivation engine.

    Complex fields are declared as two independent symbols, one naming the
    other in ``conjugate_of``.
    """

    coords: tuple
    fields: tuple
    lagrangian: Expr
    kind: str = FIELD_DENSITY
    metadata: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        specs = tuple(f if isinstance(f, FieldSpec) else FieldSpec(f) for f in self.fields)
        object.__setattr__(self, "fields", specs)
        if self.kind not in KINDS:
            raise ProblemFormatError(f"unknown problem kind {self.kind!r}")
        if self.kind == ODE_WITH_ACTION and (len(self.coords) != 1 or len(specs) != 1):
            raise ProblemFormatError("an ode-with-action problem has one coordinate and one field")
        names = {f.name for f in specs}
        for f in specs:
            if f.conjugate_of is not None and f.conjugate_of not in names:
                raise ProblemFormatError(f"{f.name} is conjugate of undeclared field {f.conjugate_of}")
        d = len(self.coords)
        for s in free_symbols(self.lagrangian):
            if isinstance(s, Field) and s.name not in names:
                raise ProblemFormatError(f"undeclared field {s.name}")
            if isinstance(s, FieldDeriv):
                if s.field not in names or any(c not in self.coords for c in s.index):
                    raise ProblemFormatError(f"undeclared symbol in {to_string(s)}")
            if isinstance(s, Coordinate) and s.name not in self.coords:
                raise ProblemFormatError(f"undeclared coordinate {s.name}")
            if isinstance(s, ActionDensity) and s.index >= d:
                raise ProblemFormatError(f"action-density component s{s.index} exceeds dimension {d}")

    @property
    def dimension(self) -> int:
        return len(self.coords)

    @property
    def field_names(self) -> tuple:
        return tuple(f.name for f in self.fields)

    def context(self) -> ParseContext:
        return problem_context(self.coords, self.field_names, self.kind)

    def partner(self, name: str) -> str:
        """Symbol whose variation yields the equation attributed to ``name``."""
        for f in self.fields:
            if f.conjugate_of == name:
                return f.name
            if f.name == name and f.conjugate_of is not None:
                return f.conjugate_of
        return name

    def with_lagrangian(self, lagrangian: Expr) -> VariationalProblem:
        return VariationalProblem(self.coords, self.fields, lagrangian, self.kind, dict(self.metadata))

    def to_dict(self) -> dict:
        fields = []
        for f in self.fields:
            entry: dict[str, Any] = {"name": f.name}
            if f.conjugate_of is not None:
                entry["conjugate_of"] = f.conjugate_of
            fields.append(entry)
        return {
            "coords": list(self.coords),
            "fields": fields,
            "lagrangian": to_string(self.lagrangian),
            "kind": self.kind,
        }


def problem_context(coords, fields, kind: str = FIELD_DENSITY) -> ParseContext:
    return ParseContext(
        coords=tuple(coords),
        fields=tuple(fields),
        action_alias="S" if kind == ODE_WITH_ACTION else None,
    )


def problem_from_dict(data: dict) -> VariationalProblem:
    """Build a problem from the JSON problem-file layout."""
    allowed = {"coords", "fields", "lagrangian", "kind", "metadata"}
    unknown = set(data) - allowed
    if unknown:
        raise ProblemFormatError(f"unknown problem keys: {sorted(unknown)}")
    try:
        coords = [str(c) for c in data["coords"]]
        raw_fields = data["fields"]
        text = data["lagrangian"]
    except KeyError as exc:
        raise ProblemFormatError(f"missing problem key {exc.args[0]!r}") from None
    kind = data.get("kind", FIELD_DENSITY)
    specs = []
    for f in raw_fields:
        if isinstance(f, str):
            specs.append(FieldSpec(f))
        elif isinstance(f, dict) and set(f) <= {"name", "conjugate_of"} and "name" in f:
            specs.append(FieldSpec(f["name"], f.get("conjugate_of")))
        else:
            raise ProblemFormatError(f"bad field declaration {f!r}")
    ctx = problem_context(coords, [s.name for s in specs], kind)
    return VariationalProblem(coords, specs, parse(text, ctx), kind, dict(data.get("metadata", {})))


def load_problem(path: str | Path) -> VariationalProblem:
    with open(path, encoding="utf-8") as handle:
        return problem_from_dict(json.load(handle))


# --- gamma vector ----------------------------------------------------------------


def _is_constant(e: Expr) -> bool:
    return not any(
        isinstance(s, (Field, FieldDeriv, Coordinate, ActionDensity, OpaqueFunction))
        for s in free_symbols(e)
    )


def extract_gamma(problem: VariationalProblem) -> tuple:
    """gamma_mu = dL/ds^mu for each coordinate direction, verified constant."""
    gammas = []
    for mu in range(problem.dimension):
        g = diff_wrt(problem.lagrangian, ActionDensity(mu))
        if not _is_constant(g):
            raise NonConstantGamma(
                f"dL/ds{mu} = {to_string(g)} is not constant; only constant gamma is supported"
            )
        gammas.append(g)
    return tuple(gammas)


# --- equations -------------------------------------------------------------------


def _time_order(term: Expr, time: str) -> tuple:
    best = (-1, -1)
    for s in free_symbols(term):
        if isinstance(s, FieldDeriv):
            best = max(best, (s.index.count(time), s.order))
        elif isinstance(s, Field):
            best = max(best, (0, 0))
    return best


def sign_normalize(lhs: Expr, time: str) -> Expr:
    """Flip the overall sign so the leading time-derivative term is positive.

    The leading term has the most time derivatives (ties broken by total
    order, then by the canonical order of its coefficient-free monomial); its
    coefficient is made to have positive real part, or positive imaginary part
    if purely imaginary.
    """
    lhs = normalize(lhs)
    terms = terms_of(lhs)
    if not terms:
        return lhs
    ranked = []
    for t in terms:
        coef, mono = split_coefficient(t)
        order = _time_order(mono, time)
        ranked.append(((-order[0], -order[1], sort_key(mono)), coef))
    _, coef = min(ranked, key=lambda r: r[0])
    if coef.re < 0 or (coef.re == 0 and coef.im < 0):
        return normalize(Product((Constant(-1), lhs)))
    return lhs


@dataclass(frozen=True)
class FieldEquation:
    """``lhs = 0`` for one field."""

    field: str
    lhs: Expr

    def __str__(self):
        return f"{to_string(self.lhs)} = 0"

    def terms(self) -> list[dict]:
        """Structured term list: coefficient plus the multiset of symbols."""
        out = []
        for coef, mono in poly_terms(self.lhs):
            symbols = []
            for atom, k in mono:
                symbols.extend([to_string(atom)] * k if k > 0 else [f"1/{to_string(atom)}"] * -k)
            out.append({"coefficient": format_constant(coef), "symbols": symbols})
        return out

    def to_dict(self) -> dict:
        return {"field": self.field, "equation": str(self), "terms": self.terms()}


def _euler_lagrange(problem: VariationalProblem, varied: str, gamma: tuple | None) -> Expr:
    L = problem.lagrangian
    parts = [diff_wrt(L, Field(varied))]
    for mu, coord in enumerate(problem.coords):
        momentum = diff_wrt(L, FieldDeriv(varied, (coord,)))
        if momentum == ZERO:
            continue
        if any(isinstance(s, FieldDeriv) and s.order > 1 for s in free_symbols(L)):
            raise DerivativeOrderError("Lagrangians with second derivatives are not supported")
        parts.append(Product((Constant(-1), total_derivative(momentum, coord))))
        if gamma is not None and gamma[mu] != ZERO:
            parts.append(Product((gamma[mu], momentum)))
    return normalize(Sum(tuple(parts)))


def derive_field_equations(problem: VariationalProblem) -> list[FieldEquation]:
    """One generalized Euler-Lagrange equation per declared field.

    For a conjugate pair the equation listed under ``psi`` comes from varying
    ``psis`` and vice versa.
    """
    gamma = extract_gamma(problem)
    time = problem.coords[0]
    out = []
    for spec in problem.fields:
        lhs = _euler_lagrange(problem, problem.partner(spec.name), gamma)
        out.append(FieldEquation(spec.name, sign_normalize(lhs, time)))
    return out


def classical_field_equations(problem: VariationalProblem) -> list[FieldEquation]:
    """Plain Euler-Lagrange equations of the Lagrangian with its s-terms removed."""
    zeroed = {ActionDensity(mu): ZERO for mu in range(problem.dimension)}
    stripped = problem.with_lagrangian(substitute(problem.lagrangian, zeroed))
    time = problem.coords[0]
    return [
        FieldEquation(spec.name, sign_normalize(_euler_lagrange(stripped, stripped.partner(spec.name), None), time))
        for spec in stripped.fields
    ]


def derive_herglotz_ode(problem: VariationalProblem) -> FieldEquation:
    """dL/dx - d/dt dL/dx' + (dL/dS) dL/dx' = 0 for the single path x(t)."""
    if problem.kind != ODE_WITH_ACTION:
        raise ProblemFormatError("derive_herglotz_ode needs an ode-with-action problem")
    (eq,) = derive_field_equations(problem)
    return eq


def derive(problem: VariationalProblem) -> list[FieldEquation]:
    if problem.kind == ODE_WITH_ACTION:
        return [derive_herglotz_ode(problem)]
    return derive_field_equations(problem)
