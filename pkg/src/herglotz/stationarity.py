"""Brute-force check of the action principle.

The action is recomputed from scratch for perturbed paths/fields, always by
integrating the action equation S' = L (or d_t s = L per spatial column), and
its derivative in the perturbation size is taken by central differences.  No
Euler-Lagrange machinery is involved.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid
from scipy.interpolate import CubicSpline

from .errors import DegenerateBump, NonFiniteAction
from .fieldsim import FieldStateSeries, LagrangianDensity, track_action_density


def _bump1(u, center: float, width: float):
    z = (np.asarray(u, dtype=float) - center) / width
    return np.where(np.abs(z) < 1.0, (0.5 * (1.0 + np.cos(np.pi * z))) ** 2, 0.0)


@dataclass(frozen=True)
class BumpPerturbation:
    """C1 compactly supported bump ((1 + cos)/2)^2 of half-width ``width``.

    One center/width pair perturbs a path; two (time, space) pairs a field.
    """

    center: tuple
    width: tuple
    amplitude: float = 1.0

    def __post_init__(self):
        c = self.center if isinstance(self.center, tuple) else (self.center,)
        w = self.width if isinstance(self.width, tuple) else (self.width,)
        object.__setattr__(self, "center", tuple(float(v) for v in c))
        object.__setattr__(self, "width", tuple(float(v) for v in w))
        if len(self.center) != len(self.width) or len(self.center) not in (1, 2):
            raise ValueError("a bump needs one or two matching center/width pairs")
        if any(w <= 0 for w in self.width):
            raise ValueError("bump widths must be positive")

    def sample(self, *axes) -> np.ndarray:
        """Bump values on a grid; ``sample(t)`` or ``sample(t, x)`` (mesh n, j)."""
        if len(axes) != len(self.center):
            raise ValueError("number of axes does not match the bump dimension")
        for ax, c, w in zip(axes, self.center, self.width):
            if not (ax[0] < c - w and c + w < ax[-1]):
                raise DegenerateBump("bump support must lie strictly inside the domain")
        parts = [_bump1(ax, c, w) for ax, c, w in zip(axes, self.center, self.width)]
        eta = parts[0] if len(parts) == 1 else np.outer(parts[0], parts[1])
        if not np.any(eta):
            raise DegenerateBump("bump does not overlap any grid node")
        return self.amplitude * eta

    def to_dict(self) -> dict:
        return {"center": list(self.center), "width": list(self.width), "amplitude": self.amplitude}


@dataclass(frozen=True)
class VariationReport:
    S0: float
    dS: float
    ref_dS: float
    ratio: float
    eps: float
    grid: dict | None = None
    bump: dict | None = None

    def to_dict(self) -> dict:
        return {
            "S0": self.S0,
            "dS": self.dS,
            "ref_dS": self.ref_dS,
            "ratio": self.ratio,
            "grid": self.grid,
            "eps": self.eps,
            "bump": self.bump,
        }


def action_1d(lagrangian: Callable, t, x, s_a: float) -> float:
    """S(b) from S' = L(t, x, x', S), S(a) = s_a, for a sampled path.

    The path is interpolated by a cubic spline; S is advanced with classical
    RK4 using the spline at the midpoints.
    """
    t = np.asarray(t, dtype=float)
    spline = CubicSpline(t, np.asarray(x, dtype=float))
    dspline = spline.derivative()
    h = np.diff(t)
    tm = t[:-1] + 0.5 * h
    xn, vn = spline(t), dspline(t)
    xm, vm = spline(tm), dspline(tm)
    S = float(s_a)
    for n in range(len(h)):
        hn = h[n]
        k1 = lagrangian(t[n], xn[n], vn[n], S)
        k2 = lagrangian(tm[n], xm[n], vm[n], S + 0.5 * hn * k1)
        k3 = lagrangian(tm[n], xm[n], vm[n], S + 0.5 * hn * k2)
        k4 = lagrangian(t[n + 1], xn[n + 1], vn[n + 1], S + hn * k3)
        S += hn / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    S = float(np.real(S))
    if not math.isfinite(S):
        raise NonFiniteAction("action integration produced a non-finite value")
    return S


def action_field_1p1(density: LagrangianDensity, series: FieldStateSeries, s1_initial=0.0) -> float:
    """Boundary flux of s = (s1, 0): int s1(t_b, x) dx - int s1(t_a, x) dx."""
    s1 = track_action_density(density, series, s1_initial)
    dx = series.grid.dx
    S = float(np.real(trapezoid(s1[-1], dx=dx) - trapezoid(s1[0], dx=dx)))
    if not math.isfinite(S):
        raise NonFiniteAction("action integration produced a non-finite value")
    return S


def stationarity_test(
    action: Callable[[np.ndarray], float],
    solution: np.ndarray,
    eta: np.ndarray,
    eps: float | None = None,
    nonsolution_offset: float = 0.5,
) -> VariationReport:
    """Central-difference first variation at ``solution`` and at a non-solution.

    ``action`` maps sampled field values to the action.  The reference point
    is ``solution + nonsolution_offset * eta``.  ``eps`` defaults to 1e-4 of
    the field scale.
    """
    solution = np.asarray(solution, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if eta.shape != solution.shape or not np.any(eta):
        raise DegenerateBump("perturbation is empty or does not match the solution grid")
    if eps is None:
        eps = 1e-4 * max(float(np.max(np.abs(solution))), 1e-300)

    def first_variation(base):
        return (action(base + eps * eta) - action(base - eps * eta)) / (2.0 * eps)

    S0 = action(solution)
    dS = first_variation(solution)
    ref_dS = first_variation(solution + nonsolution_offset * eta)
    ratio = math.inf if dS == 0 else abs(ref_dS) / abs(dS)
    return VariationReport(S0=S0, dS=dS, ref_dS=ref_dS, ratio=ratio, eps=eps)


def verify_path(
    lagrangian: Callable,
    t,
    x,
    bump: BumpPerturbation,
    s_a: float = 0.0,
    eps: float | None = None,
    nonsolution_offset: float = 0.5,
) -> VariationReport:
    """Stationarity test of a sampled path x(t) of a Herglotz problem."""
    t = np.asarray(t, dtype=float)
    eta = bump.sample(t)
    report = stationarity_test(lambda path: action_1d(lagrangian, t, path, s_a), x, eta, eps, nonsolution_offset)
    return VariationReport(
        report.S0, report.dS, report.ref_dS, report.ratio, report.eps,
        grid={"nodes": len(t), "a": float(t[0]), "b": float(t[-1])},
        bump=bump.to_dict(),
    )


def verify_field(
    density: LagrangianDensity,
    series: FieldStateSeries,
    bump: BumpPerturbation,
    s1_initial=0.0,
    eps: float | None = None,
    nonsolution_offset: float = 0.5,
) -> VariationReport:
    """Stationarity test of a simulated 1+1 field; s1 is re-tracked for every variation."""
    eta = bump.sample(series.grid.t, series.grid.x)

    def action(values):
        return action_field_1p1(density, series.replace_values(values), s1_initial)

    report = stationarity_test(action, series.values, eta, eps, nonsolution_offset)
    g = series.grid
    return VariationReport(
        report.S0, report.dS, report.ref_dS, report.ratio, report.eps,
        grid={"nx": g.nx, "nt": g.nt, "dx": g.dx, "dt": g.dt},
        bump=bump.to_dict(),
    )
