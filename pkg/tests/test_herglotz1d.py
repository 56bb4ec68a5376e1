import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from herglotz.elderive import VariationalProblem, problem_context
from herglotz.errors import BlowUp, MaxIterExceeded, Singular
from herglotz.herglotz1d import (
    OdeRight,
    dissipation_rate_check,
    integrate_ivp,
    oscillator,
    solve_bvp_shooting,
)
from herglotz.symexpr import parse


def ode_problem(text):
    ctx = problem_context(("t",), ["x"], "ode-with-action")
    return VariationalProblem(("t",), ["x"], parse(text, ctx), "ode-with-action")


def test_conservative_oscillator_is_cosine():
    traj = integrate_ivp(oscillator(), 1.0, 0.0, 0.0, (0.0, 2 * math.pi), 2048)
    assert np.max(np.abs(traj.x - np.cos(traj.t))) < 1e-11
    # S(t) = int (sin^2 - cos^2)/2 = -sin(2t)/4
    assert np.max(np.abs(traj.S + np.sin(2 * traj.t) / 4)) < 1e-11
    assert traj.p[0] == 0.0
    assert traj.H[0] == pytest.approx(0.5)


@pytest.mark.parametrize("gamma, m, k", [(0.1, 1.0, 1.0), (0.4, 2.0, 3.0), (1.0, 0.5, 4.0)])
def test_matches_closed_form(gamma, m, k):
    traj = integrate_ivp(oscillator(m, k, gamma), 1.0, 0.3, 0.0, (0.0, 10.0), 4096)
    exact = oracles.underdamped_oscillator(traj.t, m=m, k=k, gamma=gamma, x0=1.0, v0=0.3)
    assert np.max(np.abs(traj.x - exact)) < 1e-9


@settings(max_examples=20, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.5, 2.0), st.floats(-1.0, 1.0), st.floats(-1.0, 1.0))
def test_hamiltonian_and_momentum_identities(gamma, m, x0, S0):
    traj = integrate_ivp(oscillator(m, 1.0, gamma), x0, 0.5, S0, (0.0, 5.0), 256)
    T = 0.5 * m * traj.v**2
    U = 0.5 * traj.x**2
    assert np.max(np.abs(traj.H - (T + U + gamma / m * traj.S))) < 1e-12
    assert np.max(np.abs(traj.p - m * traj.v)) < 1e-12


def test_conservative_energy_converges_at_fourth_order():
    drift = []
    for steps in (256, 512):
        traj = integrate_ivp(oscillator(), 1.0, 0.0, 0.0, (0.0, 20.0), steps)
        drift.append(np.max(np.abs(traj.H - traj.H[0])))
    assert drift[0] / drift[1] > 12


def test_dissipation_residual_is_second_order():
    r = [dissipation_rate_check(integrate_ivp(oscillator(gamma=0.3), 1.0, 0.0, 0.0, (0, 10), n), 0.3, 1.0)
         for n in (1024, 2048)]
    assert 3.5 < r[0] / r[1] < 4.5


@settings(max_examples=15, deadline=None)
@given(st.floats(-2.0, 2.0), st.floats(0.0, 0.5))
def test_shooting_recovers_initial_velocity(v0, gamma):
    sys_ = oscillator(1.0, 1.0, gamma)
    ivp = integrate_ivp(sys_, 0.5, v0, 0.0, (0.0, 2.0), 128)
    bvp = solve_bvp_shooting(sys_, 0.5, float(ivp.x[-1]), 0.0, (0.0, 2.0), 128)
    assert bvp.v[0] == pytest.approx(v0, abs=1e-8)


def test_shooting_reports_best_attempt():
    sys_ = oscillator(1.0, 1.0, 0.1)
    with pytest.raises(MaxIterExceeded) as info:
        solve_bvp_shooting(sys_, 0.0, 0.7, 0.0, (0.0, 1.0), 64, tol=1e-30, max_iter=3)
    assert info.value.best_residual > 0
    assert info.value.code == "herglotz1d.max_iter"


def test_general_problem_compiles():
    # L = v^2/2 - x^4/4 - 0.2 S : x'' = -x^3 - 0.2 x'
    sys_ = OdeRight.from_problem(ode_problem("D(x,t)^2/2 - x^4/4 - 1/5*S"), {})
    assert sys_.acceleration(0.0, 2.0, 1.0, 0.0) == pytest.approx(-8.0 - 0.2)


def test_degenerate_lagrangian_is_singular():
    sys_ = OdeRight.from_problem(ode_problem("x*D(x,t) - x^2 - S"), {})
    with pytest.raises(Singular):
        integrate_ivp(sys_, 1.0, 0.0, 0.0, (0.0, 1.0), 16)


def test_blow_up_reports_step():
    sys_ = OdeRight.from_problem(ode_problem("D(x,t)^2/2 + x^4"), {})
    with pytest.raises(BlowUp) as info:
        integrate_ivp(sys_, 10.0, 0.0, 0.0, (0.0, 50.0), 64)
    assert info.value.step >= 1


def test_too_few_steps():
    with pytest.raises(ValueError):
        integrate_ivp(oscillator(), 1.0, 0.0, 0.0, (0.0, 1.0), 8)


def test_csv_export():
    traj = integrate_ivp(oscillator(), 1.0, 0.0, 0.0, (0.0, 1.0), 16)
    lines = traj.to_csv().splitlines()
    assert lines[0] == "t,x,v,S,p,H"
    assert len(lines) == 18
    assert float(lines[1].split(",")[1]) == 1.0
