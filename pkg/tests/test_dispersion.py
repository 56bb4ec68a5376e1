import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from herglotz.dispersion import (
    CRITICAL,
    OVERDAMPED,
    UNDERDAMPED,
    classify,
    dispersion_residual,
    mode_four_vector,
    to_time_units,
)
from herglotz.errors import DispersionError


def test_three_regimes():
    assert classify(3.0, 1.0).regime == OVERDAMPED
    assert classify(2.0, 1.0).regime == CRITICAL
    assert classify(1.0, 1.0).regime == UNDERDAMPED


def test_critical_double_root():
    r = classify(2.0, 1.0)
    assert r.exponents == (-1.0, -1.0)
    assert r.gamma_prime == 0.0 and r.speed is None


def test_undamped_wave_travels_at_light_speed():
    r = classify(0.0, 2.5)
    assert r.exponents == (2.5j, -2.5j)
    assert r.speed == 1.0


def test_overdamped_exponents():
    r = classify(3.0, 1.0)
    gp = np.sqrt(5.0)
    assert r.exponents[0] == pytest.approx((-3 + gp) / 2)
    assert r.exponents[1] == pytest.approx((-3 - gp) / 2)


@settings(max_examples=200)
@given(st.floats(-10, 10), st.floats(0.01, 10))
def test_exponents_solve_the_characteristic_polynomial(g0, k):
    r = classify(g0, k)
    lp, lm = r.exponents
    scale = 1.0 + g0 * g0 + k * k
    for lam in r.exponents:
        assert abs(lam * lam + g0 * lam + k * k) <= 1e-12 * scale
    assert abs(lp + lm + g0) <= 1e-12 * scale
    assert abs(lp * lm - k * k) <= 1e-10 * scale


@settings(max_examples=100)
@given(st.floats(0.01, 10), st.floats(0.01, 10))
def test_regime_depends_on_magnitude_of_gamma0(g0, k):
    assert classify(g0, k).regime == classify(-g0, k).regime


@settings(max_examples=100)
@given(st.floats(0.01, 100))
def test_boundary_is_exact(k):
    assert classify(2 * k, k).regime == CRITICAL
    assert classify(np.nextafter(2 * k, 0), k).regime == UNDERDAMPED
    assert classify(np.nextafter(2 * k, np.inf), k).regime == OVERDAMPED


@settings(max_examples=100)
@given(
    st.lists(st.floats(-3, 3), min_size=4, max_size=4),
    st.lists(st.floats(-3, 3), min_size=3, max_size=3),
)
def test_general_residual_vanishes_on_its_roots(gamma, kvec):
    # k0^2 - i g0 k0 - (|k|^2 - i g.k) = 0 solved independently by numpy
    g0, gs = gamma[0], gamma[1:]
    c = sum(v * v for v in kvec) - 1j * sum(a * b for a, b in zip(gs, kvec))
    for k0 in np.roots([1.0, -1j * g0, -c]):
        assert abs(dispersion_residual((k0, *kvec), gamma)) <= 1e-10 * (1 + abs(c) + g0 * g0)


def test_mode_four_vector_links_both_forms():
    lam = classify(1.0, 1.0).exponents[0]
    assert abs(dispersion_residual(mode_four_vector(lam, 1.0), (1.0, 0, 0, 0))) < 1e-14


def test_time_units():
    assert to_time_units(-0.5 + 1j, 3.0) == -1.5 + 3j


def test_bad_input():
    with pytest.raises(DispersionError):
        classify(1.0, 0.0)
    with pytest.raises(DispersionError):
        dispersion_residual((1, 2), (0, 0))


def test_report_fields():
    d = classify(1.0, 1.0).to_dict()
    assert set(d) == {
        "gamma0", "k", "regime", "gamma_prime", "re_lambda_plus", "im_lambda_plus",
        "re_lambda_minus", "im_lambda_minus", "speed",
    }
    assert d["speed"] == pytest.approx(cmath.sqrt(3).real / 2)
