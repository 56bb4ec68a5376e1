"""Finite-difference solvers for the dissipative field equations.

* damped wave / telegraph family  u_tt = c2 u_xx - a u_t - b u  (leapfrog)
* dissipative Schrodinger equation (Crank-Nicolson plus exact gamma0 decay)
* action-density tracking  d_t s = L  along each spatial column
* decay and exponent fits used to compare against closed forms
"""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid
from scipy.linalg import LinAlgError, solve_banded

from .elderive import VariationalProblem, extract_gamma
from .errors import (
    CourantViolation,
    LinearSolveError,
    NonConstantGamma,
    NonFiniteField,
    NonlinearActionDependence,
    NonPositiveSample,
    SimulationError,
)
from .symexpr import (
    ZERO,
    ActionDensity,
    Coordinate,
    Field,
    FieldDeriv,
    evaluate,
    free_symbols,
    lambdify,
    substitute,
)

DIRICHLET = "dirichlet"
PERIODIC = "periodic"


@dataclass(frozen=True)
class Grid1P1D:
    nx: int
    nt: int
    dx: float
    dt: float
    x0: float = 0.0

    def __post_init__(self):
        if self.nx < 8 or self.nt < 8:
            raise SimulationError("grids need at least 8 nodes in each direction")
        if not (self.dx > 0 and self.dt > 0):
            raise SimulationError("grid spacings must be positive")

    @classmethod
    def uniform(cls, length: float, duration: float, nx: int, nt: int, bc: str = DIRICHLET, x0: float = 0.0):
        """``nt`` time nodes over [0, duration]; ``nx`` nodes over the spatial extent.

        Dirichlet grids include both endpoints; periodic grids omit the right one.
        """
        dx = length / (nx if bc == PERIODIC else nx - 1)
        return cls(nx, nt, dx, duration / (nt - 1), x0)

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.nx)

    @property
    def t(self) -> np.ndarray:
        return self.dt * np.arange(self.nt)


@dataclass
class FieldStateSeries:
    """Field samples ``values[n, j]`` at time node n and space node j."""

    grid: Grid1P1D
    values: np.ndarray
    bc: str = DIRICHLET
    s1: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def replace_values(self, values: np.ndarray) -> FieldStateSeries:
        return FieldStateSeries(self.grid, values, self.bc, None, dict(self.meta))

    def to_csv(self, layout: str = "long", stream=None) -> str:
        """``long``: one ``t,x,value`` row per node; ``wide``: one row per time."""
        buf = stream or io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        t, x = self.grid.t, self.grid.x
        cplx = np.iscomplexobj(self.values)

        def cells(z):
            return [repr(float(z.real)), repr(float(z.imag))] if cplx else [repr(float(z))]

        if layout == "long":
            writer.writerow(["t", "x", "re", "im"] if cplx else ["t", "x", "value"])
            for n in range(self.grid.nt):
                for j in range(self.grid.nx):
                    writer.writerow([repr(float(t[n])), repr(float(x[j]))] + cells(self.values[n, j]))
        elif layout == "wide":
            if cplx:
                head = [f"{p}(x={float(xj)!r})" for xj in x for p in ("re", "im")]
            else:
                head = [f"x={float(xj)!r}" for xj in x]
            writer.writerow(["t"] + head)
            for n in range(self.grid.nt):
                row = [repr(float(t[n]))]
                for z in self.values[n]:
                    row.extend(cells(z))
                writer.writerow(row)
        else:
            raise ValueError(f"unknown CSV layout {layout!r}")
        return buf.getvalue() if stream is None else ""


# --- damped wave family ------------------------------------------------------------


@dataclass(frozen=True)
class DampedWaveParams:
    """u_tt = c2 u_xx - a u_t - b u."""

    c2: float
    a: float = 0.0
    b: float = 0.0

    def __post_init__(self):
        if not self.c2 > 0:
            raise SimulationError("c2 must be positive")
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise SimulationError("damping and mass coefficients must be finite")

    @classmethod
    def string(cls, mu: float, T: float, gamma: float) -> DampedWaveParams:
        return cls(c2=T / mu, a=gamma / mu)

    @classmethod
    def telegraph(cls, gamma0: float, m: float, c: float = 1.0) -> DampedWaveParams:
        return cls(c2=c * c, a=gamma0 * c, b=(m * c) ** 2)

    @classmethod
    def maxwell(cls, gamma0: float, c: float = 1.0) -> DampedWaveParams:
        """Source-free field component along z with gamma = (gamma0, 0, 0, 0)."""
        return cls(c2=c * c, a=gamma0 * c)


def _laplacian(u: np.ndarray, dx: float, bc: str) -> np.ndarray:
    if bc == PERIODIC:
        return (np.roll(u, -1) - 2.0 * u + np.roll(u, 1)) / (dx * dx)
    out = np.zeros_like(u)
    out[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (dx * dx)
    return out


def simulate_damped_wave(
    params: DampedWaveParams,
    u0: np.ndarray,
    v0: np.ndarray,
    grid: Grid1P1D,
    bc: str = DIRICHLET,
) -> FieldStateSeries:
    """Leapfrog with the damping term centered across the step.

    Dirichlet ends are held at their initial values.
    """
    if bc not in (DIRICHLET, PERIODIC):
        raise SimulationError(f"unknown boundary condition {bc!r}")
    courant = math.sqrt(params.c2) * grid.dt / grid.dx
    if courant > 1.0:
        raise CourantViolation(f"Courant number {courant:.6g} exceeds 1")
    u0 = np.asarray(u0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    if u0.shape != (grid.nx,) or v0.shape != (grid.nx,):
        raise SimulationError("initial profiles must match the spatial grid")
    dt, dx = grid.dt, grid.dx
    c2, a, b = params.c2, params.a, params.b
    out = np.empty((grid.nt, grid.nx))
    out[0] = u0
    # second-order Taylor start
    acc0 = c2 * _laplacian(u0, dx, bc) - a * v0 - b * u0
    u1 = u0 + dt * v0 + 0.5 * dt * dt * acc0
    if bc == DIRICHLET:
        u1[0], u1[-1] = u0[0], u0[-1]
    out[1] = u1
    plus, minus = 1.0 + 0.5 * a * dt, 1.0 - 0.5 * a * dt
    prev, cur = u0, u1
    for n in range(1, grid.nt - 1):
        rhs = 2.0 * cur - minus * prev + dt * dt * (c2 * _laplacian(cur, dx, bc) - b * cur)
        nxt = rhs / plus
        if bc == DIRICHLET:
            nxt[0], nxt[-1] = u0[0], u0[-1]
        if not np.all(np.isfinite(nxt)):
            raise NonFiniteField(n + 1)
        out[n + 1] = nxt
        prev, cur = cur, nxt
    return FieldStateSeries(grid, out, bc, meta={"equation": "damped_wave", "c2": c2, "a": a, "b": b})


def discrete_energy(series: FieldStateSeries, params: DampedWaveParams) -> np.ndarray:
    """Leapfrog energy at half steps; exactly conserved when a = 0."""
    u, dx, dt = series.values, series.grid.dx, series.grid.dt
    if series.bc == PERIODIC:
        grad = (np.roll(u, -1, axis=1) - u) / dx
    else:
        grad = np.diff(u, axis=1) / dx
    vel = np.diff(u, axis=0) / dt
    kinetic = 0.5 * np.sum(vel * vel, axis=1) * dx
    elastic = 0.5 * params.c2 * np.sum(grad[1:] * grad[:-1], axis=1) * dx
    mass = 0.5 * params.b * np.sum(u[1:] * u[:-1], axis=1) * dx
    return kinetic + elastic + mass


# --- Schrodinger ---------------------------------------------------------------------


def simulate_schrodinger(
    V: np.ndarray,
    gamma0: float,
    gamma1: float,
    psi0: np.ndarray,
    grid: Grid1P1D,
    hbar: float = 1.0,
    m: float = 1.0,
) -> FieldStateSeries:
    """i hbar psi_t = -hbar^2/2m (psi_xx + gamma1 psi_x) + V psi - i hbar gamma0/2 psi.

    Crank-Nicolson on everything except the gamma0 term, which multiplies
    the state by exp(-gamma0 dt / 2) each step.  Dirichlet walls psi = 0.
    """
    V = np.asarray(V, dtype=float)
    psi0 = np.asarray(psi0, dtype=complex)
    if V.shape != (grid.nx,) or psi0.shape != (grid.nx,):
        raise SimulationError("potential and initial state must match the spatial grid")
    dx, dt = grid.dx, grid.dt
    n = grid.nx - 2
    kin = -hbar * hbar / (2.0 * m)
    # interior Hamiltonian in banded form: rows = super, main, sub diagonals
    main = kin * (-2.0 / dx**2) + V[1:-1]
    upper = kin * (1.0 / dx**2 + gamma1 / (2.0 * dx))
    lower = kin * (1.0 / dx**2 - gamma1 / (2.0 * dx))
    tau = 0.5j * dt / hbar
    ab = np.zeros((3, n), dtype=complex)
    ab[0, 1:] = tau * upper
    ab[1, :] = 1.0 + tau * main
    ab[2, :-1] = tau * lower
    decay = math.exp(-0.5 * gamma0 * dt)
    out = np.empty((grid.nt, grid.nx), dtype=complex)
    psi = psi0.copy()
    psi[0] = psi[-1] = 0.0
    out[0] = psi
    for step in range(1, grid.nt):
        inner = psi[1:-1]
        rhs = (1.0 - tau * main) * inner
        rhs[:-1] -= tau * upper * inner[1:]
        rhs[1:] -= tau * lower * inner[:-1]
        try:
            new = solve_banded((1, 1), ab, rhs, check_finite=False)
        except (LinAlgError, ValueError) as exc:
            raise LinearSolveError(f"tridiagonal solve failed at step {step}: {exc}") from None
        psi = np.zeros_like(psi)
        psi[1:-1] = decay * new
        if not np.all(np.isfinite(psi)):
            raise NonFiniteField(step)
        out[step] = psi
    meta = {"equation": "schrodinger", "gamma0": gamma0, "gamma1": gamma1, "hbar": hbar, "m": m}
    return FieldStateSeries(grid, out, DIRICHLET, meta=meta)


def norm_history(series: FieldStateSeries) -> np.ndarray:
    """integral |psi|^2 dx at every time node (trapezoid; walls vanish)."""
    rho = np.abs(series.values) ** 2
    return trapezoid(rho, dx=series.grid.dx, axis=1)


def continuity_residual(
    series: FieldStateSeries, gamma0: float, gamma1: float, hbar: float = 1.0, m: float = 1.0
) -> float:
    """max |rho_t + J_x + gamma1 J + gamma0 rho| over interior nodes."""
    psi = series.values
    dx, dt = series.grid.dx, series.grid.dt
    rho = np.abs(psi) ** 2
    dpsi = (psi[:, 2:] - psi[:, :-2]) / (2.0 * dx)
    J = (hbar / m) * np.imag(np.conj(psi[:, 1:-1]) * dpsi)
    dJ = (J[:, 2:] - J[:, :-2]) / (2.0 * dx)
    drho = (rho[2:, 2:-2] - rho[:-2, 2:-2]) / (2.0 * dt)
    res = drho + dJ[1:-1] + gamma1 * J[1:-1, 1:-1] + gamma0 * rho[1:-1, 2:-2]
    return float(np.max(np.abs(res)))


# --- action density ---------------------------------------------------------------------


@dataclass(frozen=True)
class LagrangianDensity:
    """L = source(t, x, fields) + s_coefficient * s, with s the time component.

    ``source`` receives time and space meshes and a dict mapping each field
    name to ``(value, d_t, d_x)`` arrays.
    """

    source: Callable
    s_coefficient: float = 0.0
    field: str = "phi"

    @classmethod
    def from_problem(cls, problem: VariationalProblem, params: Mapping, functions: Mapping | None = None):
        """Compile a 1+1 problem; conjugate partners are bound to complex conjugates."""
        if problem.dimension != 2:
            raise SimulationError("field densities need exactly two coordinates (t, x)")
        try:
            gamma = extract_gamma(problem)
        except NonConstantGamma as exc:
            raise NonlinearActionDependence(str(exc)) from None
        bindings = dict(params)
        bindings.update(functions or {})
        g = complex(evaluate(gamma[0], bindings))
        if g.imag != 0:
            raise SimulationError("the action-density coefficient must be real")
        t_name, x_name = problem.coords
        zeroed = {ActionDensity(mu): ZERO for mu in range(problem.dimension)}
        src = substitute(problem.lagrangian, zeroed)
        args = [Coordinate(t_name), Coordinate(x_name)]
        for spec in problem.fields:
            args += [Field(spec.name), FieldDeriv(spec.name, (t_name,)), FieldDeriv(spec.name, (x_name,))]
        for s in free_symbols(src):
            if isinstance(s, FieldDeriv) and s.order > 1:
                raise SimulationError("second derivatives are not supported in the density")
        f = lambdify(src, args, bindings)
        specs = problem.fields

        def source(T, X, fields):
            flat = [T, X]
            for spec in specs:
                if spec.name in fields:
                    flat.extend(fields[spec.name])
                else:
                    flat.extend(np.conj(q) for q in fields[spec.conjugate_of])
            return np.real_if_close(f(*flat) + 0.0 * T, tol=1e6)

        primary = next(s.name for s in specs if s.conjugate_of is None)
        return cls(source, g.real, primary)

    def node_values(self, series: FieldStateSeries) -> np.ndarray:
        """Source term at every grid node with finite-difference derivatives."""
        u = series.values
        g = series.grid
        d_t = np.gradient(u, g.dt, axis=0, edge_order=2)
        if series.bc == PERIODIC:
            d_x = (np.roll(u, -1, axis=1) - np.roll(u, 1, axis=1)) / (2.0 * g.dx)
        else:
            d_x = np.gradient(u, g.dx, axis=1, edge_order=2)
        T, X = np.meshgrid(g.t, g.x, indexing="ij")
        return self.source(T, X, {self.field: (u, d_t, d_x)})


def track_action_density(density: LagrangianDensity, series: FieldStateSeries, s1_initial) -> np.ndarray:
    """Integrate d_t s = L0 + g s along each column; fills ``series.s1``.

    Exact integrating factor for g s, trapezoidal rule on the forcing.
    """
    L0 = density.node_values(series)
    g, dt = density.s_coefficient, series.grid.dt
    grow = math.exp(g * dt)
    s = np.empty_like(L0, dtype=float if not np.iscomplexobj(L0) else complex)
    s[0] = np.broadcast_to(np.asarray(s1_initial, dtype=float), (series.grid.nx,))
    for n in range(series.grid.nt - 1):
        s[n + 1] = grow * s[n] + 0.5 * dt * (grow * L0[n] + L0[n + 1])
    if not np.all(np.isfinite(s)):
        raise NonFiniteField(int(np.argmax(~np.all(np.isfinite(s), axis=1))))
    series.s1 = s
    return s


def spacetime_quadrature(density: LagrangianDensity, series: FieldStateSeries) -> float:
    """Direct trapezoidal integral of L over the space-time rectangle."""
    L0 = density.node_values(series)
    inner = trapezoid(L0, dx=series.grid.dt, axis=0)
    return float(np.real(trapezoid(inner, dx=series.grid.dx)))


# --- fits ------------------------------------------------------------------------------


@dataclass(frozen=True)
class DecayFit:
    rate: float
    intercept: float
    r2: float


def fit_exponential_decay(values, t) -> DecayFit:
    """Least-squares line through log(values); ``rate`` is minus the slope."""
    values = np.asarray(values, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(~(values > 0)):
        raise NonPositiveSample("exponential fits need strictly positive samples")
    y = np.log(values)
    slope, intercept = np.polyfit(t, y, 1)
    resid = y - (slope * t + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return DecayFit(rate=-float(slope), intercept=float(intercept), r2=r2)


def mode_amplitude(series: FieldStateSeries, profile) -> np.ndarray:
    """Projection coefficient of the field onto a spatial profile at each time."""
    profile = np.asarray(profile, dtype=float)
    return series.values @ profile / float(profile @ profile)


@dataclass(frozen=True)
class OscillationFit:
    rate: float
    frequency: float
    r2: float
    extrema: int


def fit_damped_oscillation(amplitude, t) -> OscillationFit:
    """Envelope decay rate and angular frequency of A e^{-rate t} cos(w t + p).

    Uses the extrema of the signal (refined by parabolic interpolation): they
    are spaced by pi / w and their magnitudes decay exactly like the envelope.
    """
    y = np.asarray(amplitude, dtype=float)
    t = np.asarray(t, dtype=float)
    h = t[1] - t[0]
    idx = np.where((np.abs(y[1:-1]) > np.abs(y[:-2])) & (np.abs(y[1:-1]) >= np.abs(y[2:])))[0] + 1
    if len(idx) < 3:
        raise SimulationError("need at least three extrema to fit an oscillation")
    times, mags = [], []
    for k in idx:
        y0, y1, y2 = y[k - 1], y[k], y[k + 1]
        den = y0 - 2 * y1 + y2
        off = 0.5 * (y0 - y2) / den if den != 0 else 0.0
        times.append(t[k] + off * h)
        mags.append(abs(y1 - 0.25 * (y0 - y2) * off))
    times = np.array(times)
    decay = fit_exponential_decay(np.array(mags), times)
    spacing = np.polyfit(np.arange(len(times)), times, 1)[0]
    return OscillationFit(decay.rate, math.pi / spacing, decay.r2, len(times))


def fit_two_exponents(amplitude, t, stride: int = 1) -> tuple[complex, complex]:
    """Prony fit of a(t) = A e^{l1 t} + B e^{l2 t}; returns (l1, l2), larger real part first.

    Handles real pairs, complex-conjugate pairs and (near) double roots alike.
    """
    y = np.asarray(amplitude, dtype=float)[::stride]
    h = (t[1] - t[0]) * stride
    if len(y) < 4:
        raise SimulationError("need at least four samples for a two-exponent fit")
    A = np.column_stack([y[1:-1], y[:-2]])
    coef, *_ = np.linalg.lstsq(A, y[2:], rcond=None)
    roots = np.roots([1.0, -coef[0], -coef[1]]).astype(complex)
    lam = np.log(roots) / h
    lam = sorted(lam, key=lambda z: (-z.real, -z.imag))
    return complex(lam[0]), complex(lam[1])
