"""Ready-made variational problems for the worked examples.

Relativistic presets use the time coordinate ``t`` rather than ``ct``.  With
x^0 = ct the divergence term d_0 s^0 equals d_t (s^0 / c), so the engine's
time component of the action density is s^0 / c and the coupling
``-gamma0 * s^0`` is written ``-gamma0*c*s0``.  Derivatives d_0 become
``D(., t)/c``.  Fields of the electromagnetic presets are the covariant
components A_mu; the metric is (+,-,-,-).
"""

from __future__ import annotations

from .elderive import (
    FIELD_DENSITY,
    ODE_WITH_ACTION,
    FieldSpec,
    VariationalProblem,
    problem_context,
)
from .errors import UnknownPreset
from .symexpr import parse

_METRIC = (1, -1, -1, -1)
_AXES = ("t", "x", "y", "z")


def _d(component: str, axis: int, coords: tuple) -> str:
    """d_mu of a field in engine coordinates ('0' when the axis is frozen)."""
    name = _AXES[axis]
    if name not in coords:
        return "0"
    if axis == 0:
        return f"D({component},t)/c"
    return f"D({component},{name})"


def _maxwell_lagrangian(coords: tuple, axes: tuple) -> str:
    """-1/4 F_{mu nu} F^{mu nu} - (4 pi / c) A_mu J^mu - gamma_mu s^mu."""
    terms = []
    for mu in range(4):
        for nu in range(mu + 1, 4):
            f = f"({_d(f'A{nu}', mu, coords)} - {_d(f'A{mu}', nu, coords)})"
            # -1/4 F F = -1/2 sum_{mu<nu} eta^mu eta^nu F_{mu nu}^2
            sign = -_METRIC[mu] * _METRIC[nu]
            terms.append(f"{'+' if sign > 0 else '-'} 1/2*{f}^2")
    terms.append("- 4*pi/c*(" + " + ".join(f"A{mu}*J{mu}" for mu in range(4)) + ")")
    for slot, axis in enumerate(axes):
        scale = "*c" if axis == 0 else ""
        terms.append(f"- gamma{axis}{scale}*s{slot}")
    return " ".join(terms)


def _build(coords, fields, text, kind=FIELD_DENSITY, **metadata) -> VariationalProblem:
    specs = tuple(f if isinstance(f, FieldSpec) else FieldSpec(f) for f in fields)
    ctx = problem_context(coords, [s.name for s in specs], kind)
    return VariationalProblem(tuple(coords), specs, parse(text, ctx), kind, metadata)


def _oscillator():
    return _build(
        ("t",), ("x",), "m/2*D(x,t)^2 - U(x) - gamma/m*S", ODE_WITH_ACTION,
        gamma_parameters=["gamma"],
    )


def _string():
    # elastic term carries T/2 so that the wave equation has tension T
    return _build(
        ("t", "x"), ("phi",), "mu/2*D(phi,t)^2 - T/2*D(phi,x)^2 - gamma/mu*s0",
        gamma_parameters=["gamma"],
    )


def _schrodinger_1d():
    return _build(
        ("t", "x"),
        (FieldSpec("psi"), FieldSpec("psis", conjugate_of="psi")),
        "-hbar^2/(2*m)*D(psis,x)*D(psi,x) - V(x)*psis*psi"
        " + i*hbar/2*(psis*D(psi,t) - psi*D(psis,t)) - gamma0*s0 - gamma1*s1",
        gamma_parameters=["gamma0", "gamma1"],
    )


def _klein_gordon_1p1():
    return _build(
        ("t", "x"), ("phi",),
        "1/2*(D(phi,t)^2/c^2 - D(phi,x)^2) - m^2/2*phi^2 - gamma0*c*s0 - gamma1*s1",
        gamma_parameters=["gamma0", "gamma1"], metric="(+,-)", time_coordinate="ct",
    )


def _em(coords: tuple, axes: tuple):
    return _build(
        coords, tuple(f"A{mu}" for mu in range(4)), _maxwell_lagrangian(coords, axes),
        gamma_parameters=[f"gamma{a}" for a in axes], metric="(+,-,-,-)", time_coordinate="ct",
    )


_PRESETS = {
    "oscillator": _oscillator,
    "string": _string,
    "schrodinger_1d": _schrodinger_1d,
    "klein_gordon_1p1": _klein_gordon_1p1,
    "em_1p1": lambda: _em(("t", "z"), (0, 3)),
    "em_3p1": lambda: _em(("t", "x", "y", "z"), (0, 1, 2, 3)),
}

PRESET_NAMES = tuple(_PRESETS)


def preset(name: str) -> VariationalProblem:
    try:
        factory = _PRESETS[name]
    except KeyError:
        raise UnknownPreset(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}") from None
    return factory()


def gamma_parameters(problem: VariationalProblem) -> list[str]:
    return list(problem.metadata.get("gamma_parameters", []))
