import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from snlslab.errors import InvalidParameterError
from snlslab.nonlinearity import (
    CutoffSpec,
    NonlinearityExponent,
    apply_nonlinearity,
    nonlinear_phase,
    nonlinearity_values,
    theta,
    theta_m,
    truncation_factor,
)
from snlslab.spectral import INF, Field, StrichartzAccumulator


def test_theta_plateau_and_support():
    assert theta(0.0) == 1.0
    assert theta(0.5) == 1.0
    assert theta(1.0) == 1.0
    assert theta(2.0) == 0.0
    assert theta(7.0) == 0.0
    assert isinstance(theta(0.3), float)


def test_theta_transition():
    assert 0 < theta(1.5) < 1
    assert theta(1.5) == pytest.approx(0.5)
    assert theta(1.4) > theta(1.5) > theta(1.6)


def test_theta_bump_formula():
    # psi(2-x) / (psi(2-x) + psi(x-1)), psi(s) = exp(-1/s)
    x = 1.3
    a, b = math.exp(-1 / (2 - x)), math.exp(-1 / (x - 1))
    assert theta(x) == pytest.approx(a / (a + b), rel=1e-15)


@pytest.mark.parametrize("profile", ["bump", "smoothstep"])
def test_theta_monotone(profile):
    x = np.linspace(0, 3, 3001)
    t = theta(x, profile)
    assert np.all(np.diff(t) <= 0)
    assert t.min() >= 0 and t.max() <= 1


def test_theta_rejects_negative():
    with pytest.raises(InvalidParameterError):
        theta(-0.1)


@given(st.floats(0, 50), st.floats(0.01, 100))
def test_theta_m_rescaling(x, m):
    assert theta_m(x, m) == theta(x / m)


def test_theta_m_infinite():
    assert theta_m(1e300, INF) == 1.0
    assert np.all(theta_m(np.array([0.0, 5.0]), INF) == 1.0)
    with pytest.raises(InvalidParameterError):
        theta_m(1.0, 0.0)


def test_cutoff_validation():
    with pytest.raises(InvalidParameterError):
        CutoffSpec(m=-1.0)
    with pytest.raises(InvalidParameterError):
        CutoffSpec(m=1.0, A=-1.0)
    with pytest.raises(InvalidParameterError):
        CutoffSpec(m=1.0, profile="nope")


def test_truncation_factor_cases():
    cut = CutoffSpec(m=2.0, A=0.5)
    assert truncation_factor(StrichartzAccumulator(1.5), cut) == 1.0
    assert truncation_factor(StrichartzAccumulator(3.5), cut) == 0.0
    assert 0 < truncation_factor(StrichartzAccumulator(2.5), cut) < 1
    assert truncation_factor(StrichartzAccumulator(1e9), CutoffSpec()) == 1.0


def test_truncation_factor_nonincreasing_along_accumulator():
    cut = CutoffSpec(m=1.0)
    levels = np.cumsum(np.full(100, 0.03))
    factors = [truncation_factor(StrichartzAccumulator(p), cut) for p in levels]
    assert np.all(np.diff(factors) <= 0)


def test_exponent_validation():
    with pytest.raises(InvalidParameterError):
        NonlinearityExponent(eps=1.5)
    with pytest.raises(InvalidParameterError):
        NonlinearityExponent(mu=-0.1)
    assert NonlinearityExponent(0.25).power == 3.75


def test_nonlinearity_examples():
    assert nonlinearity_values(np.array([2.0 + 0j]), NonlinearityExponent(0, 1))[0] == pytest.approx(32)
    assert nonlinearity_values(np.array([3j]), NonlinearityExponent(1, 1))[0] == pytest.approx(81j)


@given(st.floats(0, 1), st.floats(0, 1))
def test_nonlinearity_of_zero(eps, mu):
    out = nonlinearity_values(np.zeros(4, dtype=complex), NonlinearityExponent(eps, mu))
    assert np.all(out == 0)


def test_apply_nonlinearity_field(small_grid):
    f = Field(small_grid, np.exp(-small_grid.x**2) + 0j)
    out = apply_nonlinearity(f, NonlinearityExponent(0, 1))
    assert np.allclose(out.values, np.exp(-5 * small_grid.x**2))


@given(st.floats(0, 1), st.floats(0, 2 * math.pi))
def test_gauge_covariance(eps, phi):
    v = np.linspace(-2, 2, 9) * (1 + 0.5j)
    exp = NonlinearityExponent(eps, 0.7)
    left = nonlinearity_values(np.exp(1j * phi) * v, exp)
    right = np.exp(1j * phi) * nonlinearity_values(v, exp)
    assert np.allclose(left, right, rtol=1e-13, atol=1e-15)


@given(st.floats(0, 1), st.floats(0, 1))
def test_modulus_power(eps, mu):
    v = np.linspace(0.1, 3, 7) * np.exp(0.3j)
    out = nonlinearity_values(v, NonlinearityExponent(eps, mu))
    assert np.allclose(np.abs(out), mu * np.abs(v) ** (5 - eps), rtol=1e-13)


@given(st.floats(0, 0.99))
def test_lipschitz_in_eps(eps):
    # d/d eps |f|^(5-eps) = -log|f| |f|^(5-eps), bounded by 10^5 log 10 for |f| <= 10
    v = np.linspace(-10, 10, 41) + 0j
    h = 1e-3
    a = nonlinearity_values(v, NonlinearityExponent(eps, 1))
    b = nonlinearity_values(v, NonlinearityExponent(eps + h, 1))
    assert np.max(np.abs(a - b)) <= h * 1e5 * math.log(10) * 1.01


def test_nonlinear_phase_preserves_modulus():
    v = np.linspace(-2, 2, 11) * (1 - 0.3j)
    out = nonlinear_phase(v, NonlinearityExponent(0.5, 1), 0.8, 0.01)
    assert np.allclose(np.abs(out), np.abs(v), rtol=1e-15)
    # agrees with u - i dt c N(u) up to the remainder |v| theta^2 / 2
    lin = v - 1j * 0.01 * 0.8 * nonlinearity_values(v, NonlinearityExponent(0.5, 1))
    phase = 0.01 * 0.8 * np.abs(v) ** 3.5
    assert np.all(np.abs(out - lin) <= np.abs(v) * phase**2 / 2 * (1 + 1e-9) + 1e-16)
