"""Numerical solution of the one-dimensional Herglotz problem.

The path x(t) obeys the generalized Euler-Lagrange ODE and the action obeys
S' = L(t, x, x', S).  Both are integrated together as a first-order system in
(x, v, S) with the classical fixed-step fourth-order Runge-Kutta method.
"""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass

import numpy as np

from .elderive import VariationalProblem, derive_herglotz_ode
from .errors import BlowUp, MaxIterExceeded, NoBracket, Singular
from .presets import preset
from .symexpr import (
    ZERO,
    ActionDensity,
    Coordinate,
    Field,
    FieldDeriv,
    diff_wrt,
    free_symbols,
    lambdify,
    substitute,
)


@dataclass(frozen=True)
class OdeRight:
    """Closure of the Euler-Lagrange ODE and the action equation.

    All callables take ``(t, x, v, S)`` and work elementwise on arrays.
    """

    acceleration: Callable
    lagrangian: Callable
    momentum: Callable

    @classmethod
    def from_problem(
        cls,
        problem: VariationalProblem,
        params: Mapping[str, float],
        functions: Mapping | None = None,
    ) -> OdeRight:
        """Solve the derived equation for x'' and compile everything numerically.

        ``functions`` binds opaque functions, e.g. ``{"U": [U, dU]}``.
        """
        (t_name,) = problem.coords
        (x_name,) = problem.field_names
        t, x = Coordinate(t_name), Field(x_name)
        v = FieldDeriv(x_name, (t_name,))
        acc = FieldDeriv(x_name, (t_name, t_name))
        lhs = derive_herglotz_ode(problem).lhs
        lead = diff_wrt(lhs, acc)
        if acc in free_symbols(lead):
            raise Singular("equation of motion is not linear in the acceleration")
        rest = substitute(lhs, {acc: ZERO})
        bindings = dict(params)
        bindings.update(functions or {})
        args = (t, x, v, ActionDensity(0))
        f_lead = lambdify(lead, args, bindings)
        f_rest = lambdify(rest, args, bindings)

        def acceleration(t, x, v, S):
            a = f_lead(t, x, v, S)
            if np.any(a == 0):
                raise Singular("d2L/dv2 vanishes; the equation cannot be solved for x''")
            return -f_rest(t, x, v, S) / a

        L = problem.lagrangian
        return cls(
            acceleration=acceleration,
            lagrangian=lambdify(L, args, bindings),
            momentum=lambdify(diff_wrt(L, v), args, bindings),
        )


def oscillator(m: float = 1.0, k: float = 1.0, gamma: float = 0.0) -> OdeRight:
    """Damped harmonic oscillator, U(x) = k x^2 / 2."""
    return OdeRight.from_problem(
        preset("oscillator"),
        {"m": m, "gamma": gamma},
        {"U": [lambda x: 0.5 * k * x * x, lambda x: k * x, lambda x: k + 0.0 * x]},
    )


@dataclass(frozen=True)
class HerglotzTrajectory:
    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    S: np.ndarray
    p: np.ndarray
    H: np.ndarray

    @property
    def step(self) -> float:
        return float(self.t[1] - self.t[0])

    def mechanical_energy(self, gamma: float, m: float) -> np.ndarray:
        """T + U for the oscillator family, using H = T + U + (gamma/m) S."""
        return self.H - (gamma / m) * self.S

    def to_csv(self, stream=None) -> str:
        buf = stream or io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "x", "v", "S", "p", "H"])
        for row in zip(self.t, self.x, self.v, self.S, self.p, self.H):
            writer.writerow([repr(float(c)) for c in row])
        return buf.getvalue() if stream is None else ""


def _rk4(sys: OdeRight, x0, v0, S0, a: float, b: float, steps: int):
    h = (b - a) / steps
    t = a + h * np.arange(steps + 1)
    t[-1] = b
    shape = (steps + 1,) + np.shape(x0)
    xs, vs, Ss = np.empty(shape), np.empty(shape), np.empty(shape)
    x, v, S = (np.asarray(q, dtype=float) for q in (x0, v0, S0))
    xs[0], vs[0], Ss[0] = x, v, S
    acc, lag = sys.acceleration, sys.lagrangian
    # overflow is reported as BlowUp below
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(steps):
            tn = t[n]
            k1x, k1v, k1s = v, acc(tn, x, v, S), lag(tn, x, v, S)
            tm = tn + 0.5 * h
            x2, v2, s2 = x + 0.5 * h * k1x, v + 0.5 * h * k1v, S + 0.5 * h * k1s
            k2x, k2v, k2s = v2, acc(tm, x2, v2, s2), lag(tm, x2, v2, s2)
            x3, v3, s3 = x + 0.5 * h * k2x, v + 0.5 * h * k2v, S + 0.5 * h * k2s
            k3x, k3v, k3s = v3, acc(tm, x3, v3, s3), lag(tm, x3, v3, s3)
            x4, v4, s4 = x + h * k3x, v + h * k3v, S + h * k3s
            k4x, k4v, k4s = v4, acc(tn + h, x4, v4, s4), lag(tn + h, x4, v4, s4)
            x = x + h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
            v = v + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
            S = S + h / 6.0 * (k1s + 2 * k2s + 2 * k3s + k4s)
            if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v)) and np.all(np.isfinite(S))):
                raise BlowUp(n + 1)
            xs[n + 1], vs[n + 1], Ss[n + 1] = x, v, S
    return t, xs, vs, Ss


def integrate_ivp(sys: OdeRight, x0: float, v0: float, S0: float, span, steps: int) -> HerglotzTrajectory:
    """Initial-value solution on ``span = (a, b)`` with ``steps`` RK4 steps."""
    if steps < 16:
        raise ValueError("integrate_ivp needs at least 16 steps")
    a, b = map(float, span)
    t, x, v, S = _rk4(sys, x0, v0, S0, a, b, steps)
    p = np.real(sys.momentum(t, x, v, S)) * np.ones_like(t)
    H = v * p - np.real(sys.lagrangian(t, x, v, S))
    return HerglotzTrajectory(t, x, v, S, p, H)


def _terminal(sys, xa, v0, S0, a, b, steps) -> float:
    _, x, _, _ = _rk4(sys, xa, v0, S0, a, b, steps)
    return float(x[-1])


def solve_bvp_shooting(
    sys: OdeRight,
    xa: float,
    xb: float,
    S0: float,
    span,
    steps: int,
    tol: float = 1e-10,
    max_iter: int = 200,
    v_scale: float = 1.0,
    max_expand: int = 12,
) -> HerglotzTrajectory:
    """Two-point boundary values x(a) = xa, x(b) = xb by shooting on x'(a).

    A sign-changing bracket is searched on [-w, w] with w doubling from
    ``v_scale``; bisection is used when one is found, secant otherwise.
    """
    a, b = map(float, span)
    best = [math.inf, 0.0]

    def miss(v0: float) -> float:
        r = _terminal(sys, xa, v0, S0, a, b, steps) - xb
        if abs(r) < best[0]:
            best[0], best[1] = abs(r), v0
        return r

    def done(v0: float) -> HerglotzTrajectory:
        return integrate_ivp(sys, xa, v0, S0, (a, b), steps)

    r0 = miss(0.0)
    if abs(r0) <= tol:
        return done(0.0)
    lo = hi = None
    w = v_scale
    for _ in range(max_expand):
        for cand in (w, -w):
            r = miss(cand)
            if abs(r) <= tol:
                return done(cand)
            if math.copysign(1.0, r) != math.copysign(1.0, r0):
                lo, hi = (0.0, cand) if cand > 0 else (cand, 0.0)
                break
        if lo is not None:
            break
        w *= 2.0

    if lo is not None:
        r_lo = miss(lo)
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            r_mid = miss(mid)
            if abs(r_mid) <= tol:
                return done(mid)
            if mid in (lo, hi):
                break
            if math.copysign(1.0, r_mid) == math.copysign(1.0, r_lo):
                lo, r_lo = mid, r_mid
            else:
                hi = mid
        raise MaxIterExceeded("bisection did not reach tolerance", best[0], best[1])

    # no bracket: secant iteration
    v_prev, r_prev = 0.0, r0
    v_cur = v_scale
    r_cur = miss(v_cur)
    for _ in range(max_iter):
        if abs(r_cur) <= tol:
            return done(v_cur)
        slope = r_cur - r_prev
        if slope == 0 or not math.isfinite(slope):
            raise NoBracket("no bracket and the secant iteration stalled", best[0], best[1])
        v_prev, v_cur = v_cur, v_cur - r_cur * (v_cur - v_prev) / slope
        r_prev = r_cur
        try:
            r_cur = miss(v_cur)
        except BlowUp:
            raise NoBracket("no bracket and the secant iteration diverged", best[0], best[1]) from None
    raise MaxIterExceeded("secant iteration did not converge", best[0], best[1])


def dissipation_rate_check(traj: HerglotzTrajectory, gamma: float, m: float) -> float:
    """max |d(T+U)/dt + gamma v^2| over interior nodes (centered differences)."""
    E = traj.mechanical_energy(gamma, m)
    h = traj.step
    dE = (E[2:] - E[:-2]) / (2.0 * h)
    return float(np.max(np.abs(dE + gamma * traj.v[1:-1] ** 2)))
