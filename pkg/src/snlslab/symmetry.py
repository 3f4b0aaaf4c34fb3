"""Symmetry group of the mass-critical problem and profile-sequence diagnostics.

The group element with parameters (x0, xi0, lam0, t0) acts by

    (g f)(x) = lam0^(-1/2) exp(i x xi0) (exp(-i t0/lam0^2 Lap) f)((x - x0)/lam0).

Off-grid evaluation uses the band-limited trigonometric interpolant of the
samples; points that land outside [-L, L) are taken as zero, so fields must
decay inside the box (this is checked).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidParameterError, ResolutionError
from .propagator import free_evolution_series, free_multiplier, spacetime_norm
from .spectral import (
    BOUNDARY_MASS_TOL,
    Field,
    SpectralGrid,
    Trajectory,
    boundary_mass_fraction,
    forward,
    inverse,
    lp_norms,
    mass,
    spectral_tail_fraction,
)

LAMBDA_RANGE = (2.0**-4, 2.0**4)
SPECTRAL_TAIL_TOL = 1e-10
_CHUNK = 256


@dataclass(frozen=True)
class SymmetryParams:
    x0: float = 0.0
    xi0: float = 0.0
    lam0: float = 1.0
    t0: float = 0.0

    def __post_init__(self):
        if not self.lam0 > 0:
            raise InvalidParameterError(f"scale must be positive, got {self.lam0}")

    @property
    def is_identity(self) -> bool:
        return self.x0 == 0 and self.xi0 == 0 and self.lam0 == 1 and self.t0 == 0


def interpolate(values: np.ndarray, grid: SpectralGrid, points: np.ndarray) -> np.ndarray:
    """Band-limited interpolant of periodic samples at arbitrary points.

    Points outside [-L, L) evaluate to zero.
    """
    N, L = grid.points, grid.half_length
    coeffs = np.fft.fftshift(forward(values))
    m = np.arange(N) - N // 2
    points = np.asarray(points, dtype=float)
    out = np.zeros(points.shape, dtype=complex)
    inside = np.nonzero((points >= -L) & (points < L))[0]
    w = math.pi / L
    for start in range(0, inside.size, _CHUNK):
        idx = inside[start:start + _CHUNK]
        out[idx] = np.exp(1j * w * np.outer(points[idx] + L, m)) @ coeffs / N
    return out


def _translate(values: np.ndarray, grid: SpectralGrid, shift: float) -> np.ndarray:
    """f(x - shift) via the spectral phase; exact for band-limited periodic data."""
    if shift == 0:
        return values
    return inverse(forward(values) * np.exp(-1j * grid.k * shift))


def _check_params(p: SymmetryParams, grid: SpectralGrid) -> None:
    lo, hi = LAMBDA_RANGE
    if not lo <= p.lam0 <= hi:
        raise ResolutionError(f"scale {p.lam0} outside the resolvable range [{lo}, {hi}]")
    xi_max = grid.points * math.pi / (8 * grid.half_length)
    if abs(p.xi0) > xi_max:
        raise ResolutionError(f"|xi0| = {abs(p.xi0)} exceeds the resolvable {xi_max:.4g}")


def _check_result(before: np.ndarray, after: np.ndarray, grid: SpectralGrid) -> None:
    frac = boundary_mass_fraction(after, grid)
    if frac > BOUNDARY_MASS_TOL:
        raise ResolutionError(f"transformed field reaches the box edge ({frac:.3g} of its mass)")
    tail = spectral_tail_fraction(after, grid)
    if tail > SPECTRAL_TAIL_TOL:
        raise ResolutionError(f"transformed field is under-resolved (spectral tail {tail:.3g})")
    m0 = float(np.sum(np.abs(before) ** 2))
    m1 = float(np.sum(np.abs(after) ** 2))
    if m0 > 0 and abs(m1 - m0) > 1e-8 * m0:
        raise ResolutionError("transformed field lost mass outside the box")


def _apply_values(values, grid, p: SymmetryParams, time_phase: float = 0.0,
                  extra_shift: float = 0.0) -> np.ndarray:
    """Spatial part shared by the group action and transported solutions."""
    if p.t0:
        values = inverse(forward(values) * free_multiplier(grid, -p.t0 / p.lam0**2))
    shift = p.x0 + extra_shift
    if p.lam0 == 1:
        out = _translate(values, grid, shift)
    else:
        out = interpolate(values, grid, (grid.x - shift) / p.lam0) / math.sqrt(p.lam0)
    if p.xi0:
        out = out * np.exp(1j * (p.xi0 * grid.x - time_phase))
    return out


def group_apply(f: Field, p: SymmetryParams, check: bool = True) -> Field:
    """Apply the unitary group element with parameters ``p`` to ``f``."""
    if p.is_identity:
        return f.replace(f.values.copy())
    if check:
        _check_params(p, f.grid)
    out = _apply_values(f.values, f.grid, p)
    if check:
        _check_result(f.values, out, f.grid)
    return f.replace(out)


def group_apply_inverse(f: Field, p: SymmetryParams, check: bool = True) -> Field:
    """Undo :func:`group_apply`: demodulate, unscale/untranslate, then evolve back."""
    if p.is_identity:
        return f.replace(f.values.copy())
    if check:
        _check_params(p, f.grid)
    grid = f.grid
    vals = f.values * np.exp(-1j * p.xi0 * grid.x) if p.xi0 else f.values
    if p.lam0 == 1:
        vals = _translate(vals, grid, -p.x0)
    else:
        vals = interpolate(vals, grid, p.lam0 * grid.x + p.x0) * math.sqrt(p.lam0)
    if p.t0:
        vals = inverse(forward(vals) * free_multiplier(grid, p.t0 / p.lam0**2))
    if check:
        _check_result(f.values, vals, grid)
    return f.replace(vals)


def transported_solution(traj: Trajectory, p: SymmetryParams, check: bool = True) -> Trajectory:
    """Image of a solution Psi under the symmetry,

        Phi(t, x) = lam^(-1/2) e^{i x xi} e^{-i t xi^2} Psi((t - t0)/lam^2, (x - x0 - 2 xi t)/lam),

    sampled at the images t = t0 + lam^2 s of the snapshot times s of Psi.
    """
    if check:
        _check_params(p, traj.grid)
    lam, xi = p.lam0, p.xi0
    times = p.t0 + lam**2 * traj.times
    if p.is_identity:
        return Trajectory.from_arrays(traj.grid, times, traj.values.copy())
    spatial = SymmetryParams(p.x0, xi, lam, 0.0)
    rows = []
    for s_val, t_val in zip(traj.values, times):
        row = _apply_values(s_val, traj.grid, spatial, time_phase=t_val * xi**2,
                            extra_shift=2 * xi * t_val)
        if check:
            _check_result(s_val, row, traj.grid)
        rows.append(row)
    return Trajectory.from_arrays(traj.grid, times, np.array(rows))


# --------------------------------------------------------------------------
# profile sequences


@dataclass
class ProfileSet:
    """Profiles phi_j with parameter sequences (j, n) -> SymmetryParams and an
    optional remainder n -> Field."""

    profiles: list[Field]
    parameters: Callable[[int, int], SymmetryParams]
    remainder: Callable[[int], Field] | None = None

    @property
    def J(self) -> int:
        return len(self.profiles)

    def component(self, j: int, n: int) -> Field:
        return group_apply(self.profiles[j], self.parameters(j, n))

    def remainder_at(self, n: int) -> Field | None:
        return None if self.remainder is None else self.remainder(n)


def synthesize_sequence(ps: ProfileSet, n: int) -> Field:
    """f_n = sum_j g_{j,n} phi_j + remainder_n."""
    grid = ps.profiles[0].grid
    total = np.zeros(grid.points, dtype=complex)
    for j in range(ps.J):
        total += ps.component(j, n).values
    rem = ps.remainder_at(n)
    if rem is not None:
        total += rem.values
    return Field(grid, total, 0.0)


def mass_defect(ps: ProfileSet, n: int) -> float:
    """| ||f_n||^2 - sum_j ||phi_j||^2 - ||remainder_n||^2 |."""
    f = synthesize_sequence(ps, n)
    rem = ps.remainder_at(n)
    return abs(mass(f) - sum(mass(phi) for phi in ps.profiles) - (mass(rem) if rem is not None else 0.0))


def pairwise_strichartz_product(ps: ProfileSet, j: int, jp: int, n: int, horizon: float,
                                samples: int = 201) -> float:
    """||e^{it Lap}(g_{j,n} phi_j) e^{it Lap}(g_{j',n} phi_j')||_{L^{5/2}_t L^5_x(0, horizon)}."""
    if not horizon > 0:
        raise InvalidParameterError("horizon must be positive")
    times = np.linspace(0.0, horizon, samples)
    a = free_evolution_series(ps.component(j, n), times)
    b = a if jp == j else free_evolution_series(ps.component(jp, n), times)
    grid = ps.profiles[0].grid
    edge = boundary_mass_fraction(np.concatenate([a, b]), grid)
    if edge > BOUNDARY_MASS_TOL:
        raise ResolutionError(f"free evolution reaches the box edge ({edge:.3g}); shorten horizon")
    return spacetime_norm(a * b, times[1] - times[0], grid.dx, 2.5, 5.0)


def remainder_strichartz(ps: ProfileSet, n: int, horizon: float, samples: int = 201) -> float:
    """||e^{it Lap} remainder_n||_{L^5_t L^10_x(0, horizon)}; 0 without a remainder."""
    rem = ps.remainder_at(n)
    if rem is None:
        return 0.0
    times = np.linspace(0.0, horizon, samples)
    series = free_evolution_series(rem, times)
    return spacetime_norm(series, times[1] - times[0], rem.grid.dx, 5.0, 10.0)


def l2_distance(a: Field, b: Field) -> float:
    return float(lp_norms(a.values - b.values, a.grid.dx, 2))
