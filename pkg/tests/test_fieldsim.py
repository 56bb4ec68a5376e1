import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import trapezoid

from herglotz.elderive import VariationalProblem, problem_context
from herglotz.errors import CourantViolation, NonlinearActionDependence, NonPositiveSample, SimulationError
from herglotz.fieldsim import (
    PERIODIC,
    DampedWaveParams,
    Grid1P1D,
    LagrangianDensity,
    continuity_residual,
    discrete_energy,
    fit_damped_oscillation,
    fit_exponential_decay,
    fit_two_exponents,
    mode_amplitude,
    norm_history,
    simulate_damped_wave,
    simulate_schrodinger,
    spacetime_quadrature,
    track_action_density,
)
from herglotz.presets import preset
from herglotz.symexpr import parse


def string_run(gamma, nx=64, nt=256, duration=2.0):
    grid = Grid1P1D.uniform(1.0, duration, nx, nt)
    u0 = np.sin(math.pi * grid.x)
    return simulate_damped_wave(DampedWaveParams.string(1.0, 1.0, gamma), u0, np.zeros_like(u0), grid), grid


def test_grid_spacing():
    g = Grid1P1D.uniform(1.0, 2.0, 11, 21)
    assert g.dx == pytest.approx(0.1) and g.dt == pytest.approx(0.1)
    p = Grid1P1D.uniform(2 * math.pi, 1.0, 16, 11, bc=PERIODIC)
    assert p.dx == pytest.approx(2 * math.pi / 16)
    with pytest.raises(SimulationError):
        Grid1P1D.uniform(1.0, 1.0, 4, 20)


def test_courant_violation():
    grid = Grid1P1D.uniform(1.0, 1.0, 101, 11)
    with pytest.raises(CourantViolation):
        simulate_damped_wave(DampedWaveParams.string(1, 1, 0), np.zeros(101), np.zeros(101), grid)


def test_parameter_families():
    p = DampedWaveParams.string(2.0, 8.0, 1.0)
    assert (p.c2, p.a, p.b) == (4.0, 0.5, 0.0)
    t = DampedWaveParams.telegraph(0.5, 2.0, 3.0)
    assert (t.c2, t.a, t.b) == (9.0, 1.5, 36.0)


def test_conservative_energy_is_exact():
    series, _ = string_run(0.0)
    E = discrete_energy(series, DampedWaveParams.string(1, 1, 0))
    assert np.max(np.abs(E - E[0])) / E[0] < 1e-12


@settings(max_examples=15, deadline=None)
@given(st.floats(0.05, 3.0))
def test_damped_energy_never_increases(gamma):
    series, _ = string_run(gamma)
    E = discrete_energy(series, DampedWaveParams.string(1, 1, gamma))
    assert np.all(np.diff(E) <= 1e-14 * E[0])


def test_dirichlet_ends_are_held():
    series, _ = string_run(0.3)
    assert np.all(series.values[:, 0] == 0.0) and np.all(series.values[:, -1] == series.values[0, -1])


def test_string_mode_on_coarse_grid():
    series, grid = string_run(0.4, nx=128, nt=2048, duration=8.0)
    fit = fit_damped_oscillation(mode_amplitude(series, np.sin(math.pi * grid.x)), grid.t)
    assert fit.rate == pytest.approx(0.2, rel=0.02)
    assert fit.frequency == pytest.approx(math.sqrt(math.pi**2 - 0.04), rel=0.02)


def test_periodic_telegraph_mode():
    grid = Grid1P1D.uniform(2 * math.pi, 4.0, 64, 401, bc=PERIODIC)
    prof = np.cos(2 * grid.x)
    params = DampedWaveParams.telegraph(0.5, 1.0)
    series = simulate_damped_wave(params, prof, np.zeros_like(prof), grid, bc=PERIODIC)
    lam = fit_two_exponents(mode_amplitude(series, prof), grid.t)
    # lambda^2 + 0.5 lambda + (4 + 1) = 0
    expected = np.roots([1.0, 0.5, 5.0])
    assert sorted(np.imag(lam)) == pytest.approx(sorted(np.imag(expected)), rel=0.01)
    assert np.real(lam) == pytest.approx([-0.25, -0.25], rel=0.01)


def schrodinger_grid(nx=201, nt=101):
    return Grid1P1D.uniform(20.0, 2.0, nx, nt, x0=-10.0)


def packet(grid):
    x = grid.x
    return np.exp(-(x**2) / 2 + 1j * x)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.0, 2.0), st.sampled_from(["free", "harmonic"]))
def test_norm_decays_exactly_at_gamma0(gamma0, potential):
    grid = schrodinger_grid()
    V = np.zeros(grid.nx) if potential == "free" else 0.5 * grid.x**2
    nh = norm_history(simulate_schrodinger(V, gamma0, 0.0, packet(grid), grid))
    assert np.max(np.abs(nh / nh[0] - np.exp(-gamma0 * grid.t))) < 1e-12


def test_gamma1_changes_norm_only_through_flux():
    grid = schrodinger_grid(401, 201)
    series = simulate_schrodinger(np.zeros(grid.nx), 0.0, 0.4, packet(grid), grid)
    assert continuity_residual(series, 0.0, 0.4) < 5e-3
    nh = norm_history(series)
    assert abs(nh[-1] / nh[0] - 1.0) > 1e-3


def test_schrodinger_shape_checks():
    grid = schrodinger_grid()
    with pytest.raises(SimulationError):
        simulate_schrodinger(np.zeros(3), 0.0, 0.0, packet(grid), grid)


def test_exponential_fit_is_exact_on_exponentials():
    t = np.linspace(0, 3, 50)
    fit = fit_exponential_decay(2.0 * np.exp(-0.7 * t), t)
    assert fit.rate == pytest.approx(0.7, abs=1e-12) and fit.r2 == pytest.approx(1.0)
    with pytest.raises(NonPositiveSample):
        fit_exponential_decay(np.array([1.0, 0.0, 1.0]), t[:3])


@settings(max_examples=30, deadline=None)
@given(st.floats(-2.0, -0.1), st.floats(0.3, 3.0))
def test_prony_recovers_complex_pair(re, im):
    t = np.linspace(0, 4, 400)
    a = np.exp(re * t) * np.cos(im * t + 0.3)
    l1, l2 = fit_two_exponents(a, t)
    assert l1 == pytest.approx(complex(re, im), abs=1e-6)
    assert l2 == pytest.approx(complex(re, -im), abs=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.floats(-1.0, -0.1), st.floats(0.2, 2.0))
def test_prony_recovers_real_pair(l1, gap):
    t = np.linspace(0, 4, 400)
    l2 = l1 - gap
    a = np.exp(l1 * t) + 0.5 * np.exp(l2 * t)
    f1, f2 = fit_two_exponents(a, t)
    assert f1 == pytest.approx(l1, abs=1e-6) and f2 == pytest.approx(l2, abs=1e-6)


def test_damped_oscillation_fit_on_synthetic_signal():
    t = np.linspace(0, 20, 4001)
    fit = fit_damped_oscillation(np.exp(-0.15 * t) * np.cos(2.0 * t + 0.4), t)
    assert fit.rate == pytest.approx(0.15, rel=1e-3)
    assert fit.frequency == pytest.approx(2.0, rel=1e-4)


def test_mode_amplitude_of_profile_is_one():
    series, grid = string_run(0.0)
    assert mode_amplitude(series, np.sin(math.pi * grid.x))[0] == pytest.approx(1.0)


def test_action_density_tracking_converges_at_second_order():
    # d_t s = f(t) + g s, s(0) = 0
    g = -0.8
    density = LagrangianDensity(lambda T, X, f: np.ones_like(T) + 0.3 * np.sin(T), g)
    errs = []
    for nt in (33, 65, 129):
        series, grid = string_run(0.0, nx=16, nt=nt, duration=1.0)
        s = track_action_density(density, series, 0.0)
        # integrating factor solution of s' = 1 + 0.3 sin t + g s on a fine grid
        tt = np.linspace(0, 1.0, 200001)
        forcing = (1 + 0.3 * np.sin(tt)) * np.exp(-g * tt)
        exact = math.exp(g) * trapezoid(forcing, tt)
        errs.append(abs(s[-1, 0] - exact))
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_tracking_fills_series_and_matches_quadrature_when_conservative():
    density = LagrangianDensity.from_problem(preset("string"), {"mu": 1.0, "T": 1.0, "gamma": 0.0})
    series, _ = string_run(0.0)
    s = track_action_density(density, series, 0.0)
    assert series.s1 is s
    flux = trapezoid(s[-1], dx=series.grid.dx)
    assert flux == pytest.approx(spacetime_quadrature(density, series), abs=1e-13)


def test_schrodinger_density_is_real():
    p = preset("schrodinger_1d")
    params = {"hbar": 1.0, "m": 1.0, "gamma0": 0.0, "gamma1": 0.0}
    density = LagrangianDensity.from_problem(p, params, {"V": [lambda x: 0.5 * x * x]})
    grid = schrodinger_grid()
    series = simulate_schrodinger(0.5 * grid.x**2, 0.0, 0.0, packet(grid), grid)
    vals = density.node_values(series)
    assert not np.iscomplexobj(vals) or np.max(np.abs(np.imag(vals))) < 1e-12


def test_nonconstant_gamma_is_rejected_for_tracking():
    ctx = problem_context(("t", "x"), ["phi"])
    p = VariationalProblem(("t", "x"), ["phi"], parse("D(phi,t)^2/2 - phi*s0", ctx))
    with pytest.raises(NonlinearActionDependence):
        LagrangianDensity.from_problem(p, {})


def test_csv_layouts():
    series, grid = string_run(0.1, nx=8, nt=9, duration=0.5)
    long = series.to_csv("long").splitlines()
    assert long[0] == "t,x,value" and len(long) == 1 + 8 * 9
    wide = series.to_csv("wide").splitlines()
    assert wide[0].startswith("t,x=0.0,") and len(wide) == 10
    z = simulate_schrodinger(np.zeros(8), 0.0, 0.0, np.ones(8), Grid1P1D.uniform(1.0, 0.1, 8, 8))
    assert z.to_csv().splitlines()[0] == "t,x,re,im"
    with pytest.raises(ValueError):
        series.to_csv("tall")
