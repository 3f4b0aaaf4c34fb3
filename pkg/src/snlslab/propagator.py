"""The free Schrodinger group exp(it Laplacian) as a spectral multiplier, and
empirical checks of its dispersive and Strichartz bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BoxTooSmallError, DegenerateFitError, InvalidParameterError, UndefinedRatioError
from .spectral import (
    BOUNDARY_MASS_TOL,
    INF,
    AdmissiblePair,
    Field,
    SpectralGrid,
    boundary_mass_fraction,
    forward,
    inverse,
    lp_norms,
    mass,
)


def free_multiplier(grid: SpectralGrid, t: float) -> np.ndarray:
    return np.exp(-1j * grid.k**2 * t)


def free_evolve_values(values: np.ndarray, grid: SpectralGrid, t: float) -> np.ndarray:
    if t == 0:
        return np.array(values, dtype=complex, copy=True)
    return inverse(forward(values) * free_multiplier(grid, t))


def free_evolve(f: Field, t: float) -> Field:
    """exp(it Laplacian) f, exact on the grid; the result carries time f.time + t."""
    return f.replace(free_evolve_values(f.values, f.grid, t), f.time + t)


def free_evolution_series(f: Field, times) -> np.ndarray:
    """Rows exp(i t_n Laplacian) f for every t_n in ``times``."""
    times = np.asarray(times, dtype=float)
    fhat = forward(f.values)
    return inverse(fhat[None, :] * np.exp(-1j * np.outer(times, f.grid.k**2)))


def gaussian_free_solution(x: np.ndarray, t: float, width: float = 1.0) -> np.ndarray:
    """Closed form of exp(it Laplacian) exp(-x^2/width^2) on the real line."""
    a = width**2 + 4j * t
    return np.sqrt(width**2 / a) * np.exp(-(x**2) / a)


@dataclass
class DispersiveFitReport:
    times: np.ndarray
    sup_norms: np.ndarray
    fitted_exponent: float
    fit_residual: float
    p: float = 1.0
    expected_exponent: float = -0.5
    boundary_fraction: float = 0.0

    @property
    def deviation(self) -> float:
        return abs(self.fitted_exponent - self.expected_exponent)


def _conjugate_exponent(p: float) -> float:
    return INF if p == 1 else p / (p - 1)


def check_dispersive_decay(
    f: Field,
    p: float = 1.0,
    t_min: float = 1.0,
    t_max: float = 50.0,
    samples: int = 40,
    boundary_tol: float = BOUNDARY_MASS_TOL,
) -> DispersiveFitReport:
    """Fit log ||exp(it Lap) f||_{L^p'} against log t on log-spaced times.

    The fitted slope should approach 1/2 - 1/p.  Raises
    :class:`BoxTooSmallError` if the dispersed solution reaches the box edge
    and :class:`DegenerateFitError` for zero data.
    """
    if not 1 <= p <= 2:
        raise InvalidParameterError(f"p must lie in [1, 2], got {p}")
    if not 0 < t_min < t_max or samples < 2:
        raise InvalidParameterError("need 0 < t_min < t_max and at least two samples")
    if mass(f) == 0:
        raise DegenerateFitError("zero data: the decay exponent is undefined")
    times = np.geomspace(t_min, t_max, samples)
    series = free_evolution_series(f, times)
    frac = boundary_mass_fraction(series, f.grid)
    if frac > boundary_tol:
        raise BoxTooSmallError(
            f"{frac:.3g} of the mass reached the box edge by t={t_max}; enlarge the grid"
        )
    norms = lp_norms(series, f.grid.dx, _conjugate_exponent(p))
    if np.any(norms <= 0):
        raise DegenerateFitError("a sampled norm vanished")
    lt, ln = np.log(times), np.log(norms)
    slope, intercept = np.polyfit(lt, ln, 1)
    resid = float(np.sqrt(np.mean((ln - (slope * lt + intercept)) ** 2)))
    return DispersiveFitReport(
        times=times,
        sup_norms=norms,
        fitted_exponent=float(slope),
        fit_residual=resid,
        p=p,
        expected_exponent=0.5 - 1.0 / p,
        boundary_fraction=frac,
    )


def spacetime_norm(series: np.ndarray, dt: float, dx: float, q: float, r: float) -> float:
    """L^q_t L^r_x norm of rows sampled every ``dt`` (left-endpoint rule in time)."""
    spatial = lp_norms(series, dx, r)
    if q == INF:
        return float(spatial.max())
    # last row closes the interval and carries no weight
    return float((dt * np.sum(spatial[:-1] ** q)) ** (1.0 / q))


def strichartz_ratio(f: Field, pair: AdmissiblePair, horizon: float, samples: int = 201) -> float:
    """||exp(it Lap) f||_{L^q_t L^r_x(0, horizon)} / ||f||_{L^2}."""
    m = mass(f)
    if m == 0:
        raise UndefinedRatioError("Strichartz ratio is undefined for zero data")
    if not horizon > 0:
        raise InvalidParameterError("horizon must be positive")
    times = np.linspace(0.0, horizon, samples)
    series = free_evolution_series(f, times)
    return spacetime_norm(series, times[1] - times[0], f.grid.dx, pair.q, pair.r) / math.sqrt(m)
