import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from snlslab.errors import InvalidParameterError, TimeRangeError
from snlslab.spectral import (
    INF,
    AdmissiblePair,
    Field,
    SpectralGrid,
    StrichartzAccumulator,
    Trajectory,
    boundary_mass_fraction,
    difference,
    forward,
    inner,
    inverse,
    is_admissible,
    lebesgue_norm,
    lp_norms,
    mass,
    spectral_tail_fraction,
    x1_norm,
    x2_norm,
    x_norm,
)


def test_grid_layout(small_grid):
    g = small_grid
    assert g.x[0] == -g.half_length
    assert g.x[-1] == pytest.approx(g.half_length - g.dx)
    assert g.k[1] == pytest.approx(math.pi / g.half_length)
    assert g.k_max == pytest.approx(g.points * math.pi / (2 * g.half_length))
    assert np.all(np.diff(g.wavenumbers) > 0)


@pytest.mark.parametrize("points", [0, 6, 100, 7.0])
def test_grid_rejects_bad_points(points):
    with pytest.raises(InvalidParameterError):
        SpectralGrid(1.0, points)


def test_grid_rejects_bad_length():
    with pytest.raises(InvalidParameterError):
        SpectralGrid(-1.0, 64)


def test_field_validation(small_grid):
    with pytest.raises(InvalidParameterError):
        Field(small_grid, np.zeros(3))
    bad = np.zeros(small_grid.points, dtype=complex)
    bad[3] = np.nan
    with pytest.raises(InvalidParameterError):
        Field(small_grid, bad)


def test_transforms_round_trip(small_grid, rng):
    v = rng.standard_normal(small_grid.points) + 1j * rng.standard_normal(small_grid.points)
    assert np.allclose(inverse(forward(v)), v, atol=1e-14)


def test_parseval(small_grid, rng):
    v = rng.standard_normal(small_grid.points) + 1j * rng.standard_normal(small_grid.points)
    f = Field(small_grid, v)
    spectral = float(np.sum(np.abs(f.spectrum()) ** 2)) * small_grid.spectral_weight
    assert spectral == pytest.approx(mass(f), rel=1e-13)


@pytest.mark.parametrize("p", [1.0, 2.0, 5.0, 10.0])
def test_gaussian_lp_norms(lab_grid, p):
    # ||exp(-x^2)||_p^p = sqrt(pi / p)
    f = Field(lab_grid, np.exp(-lab_grid.x**2) + 0j)
    assert lebesgue_norm(f, p) == pytest.approx((math.pi / p) ** (0.5 / p), rel=1e-13)


def test_sup_norm(lab_grid):
    f = Field(lab_grid, 3 * np.exp(-lab_grid.x**2) + 0j)
    assert lebesgue_norm(f, INF) == pytest.approx(3.0)


def test_lp_rejects_small_p():
    with pytest.raises(InvalidParameterError):
        lp_norms(np.ones(4), 1.0, 0.5)


def test_lp_norms_survive_huge_values(small_grid):
    v = np.full(small_grid.points, 1e200, dtype=complex)
    n = lp_norms(v, small_grid.dx, 10)
    assert np.isfinite(n)
    assert n == pytest.approx(1e200 * (2 * small_grid.half_length) ** 0.1)


def test_lp_norms_batched(small_grid, rng):
    rows = rng.standard_normal((3, small_grid.points)) + 0j
    batched = lp_norms(rows, small_grid.dx, 4)
    single = [lp_norms(r, small_grid.dx, 4) for r in rows]
    assert np.allclose(batched, single, rtol=1e-14)


@given(st.floats(1.0, 10.0), st.floats(-5, 5), st.floats(0.1, 10))
def test_norm_homogeneity(p, shift, amp):
    g = SpectralGrid(8 * math.pi, 256)
    v = np.exp(-(g.x - shift) ** 2) + 0j
    assert lp_norms(amp * v, g.dx, p) == pytest.approx(amp * lp_norms(v, g.dx, p), rel=1e-12)


@pytest.mark.parametrize("q,r", [(INF, 2), (5, 10), (4, INF), (8, 4)])
def test_admissible_pairs(q, r):
    assert is_admissible(q, r)
    AdmissiblePair(q, r)


@pytest.mark.parametrize("q,r", [(2, INF), (5, 5), (1, 10), (4, 1), ("a", 2)])
def test_inadmissible_pairs(q, r):
    assert not is_admissible(q, r)


def test_admissible_pair_rejects():
    with pytest.raises(InvalidParameterError):
        AdmissiblePair(5, 5)


@given(st.floats(2.0, 1e6))
def test_admissible_curve(r):
    # 2/q + 1/r = 1/2  <=>  q = 4r/(r-2)
    if r > 2:
        assert is_admissible(4 * r / (r - 2), r)


def test_inner_product(lab_grid, gaussian):
    assert inner(gaussian, gaussian).real == pytest.approx(mass(gaussian))
    assert inner(gaussian.scaled(1j), gaussian) == pytest.approx(1j * mass(gaussian))


def test_boundary_and_tail_fractions(lab_grid):
    inside = np.exp(-lab_grid.x**2) + 0j
    assert boundary_mass_fraction(inside, lab_grid) < 1e-300
    edge = np.exp(-(lab_grid.x - 0.95 * lab_grid.half_length) ** 2) + 0j
    assert boundary_mass_fraction(edge, lab_grid) > 0.5
    assert spectral_tail_fraction(inside, lab_grid) < 1e-30
    rough = np.cos(0.9 * lab_grid.k_max * lab_grid.x) + 0j
    assert spectral_tail_fraction(rough, lab_grid) > 0.99
    assert boundary_mass_fraction(np.zeros(lab_grid.points), lab_grid) == 0.0


def test_accumulator_left_endpoint(lab_grid, gaussian):
    acc = StrichartzAccumulator()
    acc.advance(gaussian, 0.1)
    acc.advance(gaussian.scaled(2.0), 0.1)
    l10 = lebesgue_norm(gaussian, 10)
    assert acc.power_integral == pytest.approx(0.1 * l10**5 * (1 + 32))
    assert acc.sup_mass == pytest.approx(2 * lebesgue_norm(gaussian, 2))
    snap = acc.copy()
    acc.advance(gaussian, 1.0)
    assert snap.power_integral < acc.power_integral


def _constant_trajectory(grid, amp=1.0, n=11):
    v = amp * np.exp(-grid.x**2) + 0j
    return Trajectory.from_arrays(grid, np.linspace(0, 1, n), np.tile(v, (n, 1)))


def test_constant_trajectory_norms(lab_grid):
    tr = _constant_trajectory(lab_grid)
    l10 = (math.pi / 10) ** 0.05
    assert x2_norm(tr) == pytest.approx(l10, rel=1e-12)
    assert x1_norm(tr) == pytest.approx((math.pi / 2) ** 0.25)
    assert x_norm(tr) == pytest.approx(x1_norm(tr) + x2_norm(tr))
    # subinterval of length 0.25 scales the L^5_t factor by 0.25^(1/5)
    assert x2_norm(tr, 0.5, 0.75) == pytest.approx(l10 * 0.25**0.2, rel=1e-12)
    assert x2_norm(tr, 0.33, 0.33) == 0.0


def test_x2_norm_additive_in_fifth_power(lab_grid, rng):
    vals = rng.standard_normal((21, lab_grid.points)) * np.exp(-lab_grid.x**2)
    tr = Trajectory.from_arrays(lab_grid, np.linspace(0, 2, 21), vals)
    whole = x2_norm(tr) ** 5
    assert whole == pytest.approx(x2_norm(tr, 0, 0.7) ** 5 + x2_norm(tr, 0.7, 2) ** 5, rel=1e-12)


def test_trajectory_span_errors(lab_grid):
    tr = _constant_trajectory(lab_grid)
    with pytest.raises(TimeRangeError):
        x2_norm(tr, 0.5, 2.0)
    with pytest.raises(TimeRangeError):
        x2_norm(tr, 0.6, 0.5)
    with pytest.raises(TimeRangeError):
        tr.at(0.55)
    assert tr.at(0.5).time == pytest.approx(0.5)


def test_trajectory_rejects_unsorted_times(lab_grid):
    v = np.zeros((2, lab_grid.points))
    with pytest.raises(InvalidParameterError):
        Trajectory.from_arrays(lab_grid, [1.0, 0.0], v)


def test_from_snapshots_and_difference(lab_grid, gaussian):
    tr = Trajectory.from_snapshots([gaussian, gaussian.replace(time=1.0)])
    assert len(tr) == 2
    d = difference(tr, tr)
    assert x_norm(d) == 0.0
    other = Trajectory.from_snapshots([gaussian, gaussian.replace(time=2.0)])
    with pytest.raises(InvalidParameterError):
        difference(tr, other)


def test_accumulator_matches_norm(lab_grid):
    tr = _constant_trajectory(lab_grid, amp=1.5)
    assert tr.accumulator[-1] == pytest.approx(x2_norm(tr) ** 5)
    assert tr.final_accumulator().power_integral == pytest.approx(x2_norm(tr) ** 5)
