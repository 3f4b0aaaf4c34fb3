"""Periodic grid on [-L, L), complex fields on it, and the space/space-time
Lebesgue norms used throughout the package.

Transforms follow the unnormalized numpy convention: ``forward`` is the DFT,
``inverse`` divides by N.  With that convention

    sum_j |f_j|^2 dx == sum_k |fhat_k|^2 * grid.spectral_weight

where ``spectral_weight = dx / N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .errors import InvalidParameterError, TimeRangeError

INF = math.inf

# Fraction of the box (on each side) treated as "near the boundary".
BOUNDARY_MARGIN = 0.1
BOUNDARY_MASS_TOL = 1e-10


def forward(values: np.ndarray) -> np.ndarray:
    return sfft.fft(values, axis=-1, workers=1)


def inverse(coeffs: np.ndarray) -> np.ndarray:
    return sfft.ifft(coeffs, axis=-1, workers=1)


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform periodic grid x_j = -L + j*dx, j = 0..N-1, dx = 2L/N."""

    half_length: float = 40 * math.pi
    points: int = 4096

    def __post_init__(self):
        n = self.points
        if not isinstance(n, (int, np.integer)) or n < 8 or n & (n - 1):
            raise InvalidParameterError(f"points must be a power of two >= 8, got {n!r}")
        if not self.half_length > 0 or not math.isfinite(self.half_length):
            raise InvalidParameterError(f"half_length must be positive, got {self.half_length!r}")

    @property
    def dx(self) -> float:
        return 2.0 * self.half_length / self.points

    @cached_property
    def x(self) -> np.ndarray:
        x = -self.half_length + self.dx * np.arange(self.points)
        x.flags.writeable = False
        return x

    @cached_property
    def k(self) -> np.ndarray:
        """Wavenumbers pi*j/L in FFT storage order."""
        j = np.fft.fftfreq(self.points, d=1.0 / self.points)
        k = (math.pi / self.half_length) * j
        k.flags.writeable = False
        return k

    @property
    def wavenumbers(self) -> np.ndarray:
        """Wavenumbers sorted from -N/2 to N/2-1 (times pi/L)."""
        return np.fft.fftshift(self.k)

    @property
    def k_max(self) -> float:
        return math.pi / self.dx

    @property
    def spectral_weight(self) -> float:
        return self.dx / self.points

    def field(self, values, time: float = 0.0) -> Field:
        return Field(self, np.asarray(values, dtype=complex), time)

    def zeros(self, time: float = 0.0) -> Field:
        return Field(self, np.zeros(self.points, dtype=complex), time)

    def boundary_mask(self, margin: float = BOUNDARY_MARGIN) -> np.ndarray:
        return np.abs(self.x) >= (1.0 - margin) * self.half_length


@dataclass(frozen=True, eq=False)
class Field:
    """Complex samples of u(t, .) on a grid."""

    grid: SpectralGrid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.points,):
            raise InvalidParameterError(
                f"field has shape {values.shape}, grid expects ({self.grid.points},)"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidParameterError("field contains non-finite values")
        object.__setattr__(self, "values", values)

    def replace(self, values=None, time: float | None = None) -> Field:
        return Field(
            self.grid,
            self.values if values is None else values,
            self.time if time is None else time,
        )

    def conj(self) -> Field:
        return self.replace(np.conj(self.values))

    def scaled(self, alpha: complex) -> Field:
        return self.replace(alpha * self.values)

    def spectrum(self) -> np.ndarray:
        return forward(self.values)


@dataclass(frozen=True)
class AdmissiblePair:
    """Exponents (q, r) with 2/q + 1/r = 1/2; ``INF`` stands for infinity."""

    q: float
    r: float

    def __post_init__(self):
        if not is_admissible(self.q, self.r):
            raise InvalidParameterError(f"({self.q}, {self.r}) is not an admissible pair")


@dataclass
class StrichartzAccumulator:
    """Running integral of ||u(s)||_{L^10}^5 ds and running sup of ||u(s)||_{L^2}.

    The integral is a left-endpoint Riemann sum: ``advance(u, dt)`` adds the
    contribution of the interval [t, t+dt) using the state at its start.
    """

    power_integral: float = 0.0
    sup_mass: float = 0.0

    def advance(self, f: Field, dt: float) -> None:
        self.power_integral += dt * lebesgue_norm(f, 10) ** 5
        self.observe(f)

    def observe(self, f: Field) -> None:
        self.sup_mass = max(self.sup_mass, lebesgue_norm(f, 2))

    def copy(self) -> StrichartzAccumulator:
        return StrichartzAccumulator(self.power_integral, self.sup_mass)


def _inv(p: float) -> float:
    return 0.0 if p == INF else 1.0 / p


def lp_norms(values: np.ndarray, dx: float, p: float) -> np.ndarray:
    """L^p norm along the last axis, scaled by the max to avoid overflow."""
    if not p >= 1:
        raise InvalidParameterError(f"p must lie in [1, inf], got {p!r}")
    a = np.abs(values)
    peak = a.max(axis=-1)
    if p == INF:
        return peak
    scale = np.where(peak > 0, peak, 1.0)
    s = np.sum((a / scale[..., None]) ** p, axis=-1) * dx
    return peak * s ** (1.0 / p)


def l2_l10_norms(values: np.ndarray, dx: float) -> tuple[np.ndarray, np.ndarray]:
    """(L^2, L^10) norms along the last axis from a single modulus pass."""
    a = np.abs(values)
    peak = a.max(axis=-1)
    scale = np.where(peak > 0, peak, 1.0)
    a2 = (a / scale[..., None]) ** 2
    l2 = peak * np.sqrt(np.sum(a2, axis=-1) * dx)
    l10 = peak * (np.sum(a2**5, axis=-1) * dx) ** 0.1
    return l2, l10


def lebesgue_norm(f: Field, p: float) -> float:
    """(sum_j |f_j|^p dx)^(1/p), or max_j |f_j| when p is infinite."""
    return float(lp_norms(f.values, f.grid.dx, p))


def mass(f: Field) -> float:
    """Squared L^2 norm."""
    return float(np.sum(np.abs(f.values) ** 2) * f.grid.dx)


def is_admissible(q: float, r: float) -> bool:
    try:
        if q < 2 or r < 2:
            return False
    except TypeError:
        return False
    return abs(2 * _inv(q) + _inv(r) - 0.5) <= 1e-12


def inner(f: Field, g: Field) -> complex:
    """L^2 inner product, linear in the first slot."""
    return complex(np.sum(f.values * np.conj(g.values)) * f.grid.dx)


def boundary_mass_fraction(values: np.ndarray, grid: SpectralGrid,
                           margin: float = BOUNDARY_MARGIN) -> float:
    """Largest (over any leading axes) share of mass within ``margin*L`` of the edge."""
    a2 = np.abs(values) ** 2
    total = a2.sum(axis=-1)
    edge = a2[..., grid.boundary_mask(margin)].sum(axis=-1)
    frac = np.where(total > 0, edge / np.where(total > 0, total, 1.0), 0.0)
    return float(np.max(frac))


def spectral_tail_fraction(values: np.ndarray, grid: SpectralGrid, cut: float = 2 / 3) -> float:
    """Share of spectral energy above ``cut * k_max`` (largest over leading axes)."""
    c2 = np.abs(forward(values)) ** 2
    total = c2.sum(axis=-1)
    tail = c2[..., np.abs(grid.k) > cut * grid.k_max].sum(axis=-1)
    frac = np.where(total > 0, tail / np.where(total > 0, total, 1.0), 0.0)
    return float(np.max(frac))


# --------------------------------------------------------------------------
# space-time norms


@dataclass
class Trajectory:
    """Time series of a solution on a grid.

    ``times``/``values`` are the recorded snapshots.  ``step_times`` together
    with ``step_l2`` and ``step_l10`` hold the spatial norms at every time
    step, which is what the space-time norms integrate: the integrand of the
    L^5_t L^10_x norm is taken piecewise constant, equal to its value at the
    left end of each step.
    """

    grid: SpectralGrid
    times: np.ndarray
    values: np.ndarray
    step_times: np.ndarray
    step_l2: np.ndarray
    step_l10: np.ndarray
    config: object = None
    noise_path_id: int | None = None
    stopping_time: float | None = None
    gaussians: np.ndarray | None = None
    offset: float = 0.0
    power_history: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_snapshots(cls, fields, **kwargs) -> Trajectory:
        fields = list(fields)
        if not fields:
            raise InvalidParameterError("need at least one snapshot")
        grid = fields[0].grid
        times = np.array([f.time for f in fields], dtype=float)
        values = np.stack([f.values for f in fields])
        return cls.from_arrays(grid, times, values, **kwargs)

    @classmethod
    def from_arrays(cls, grid: SpectralGrid, times, values, **kwargs) -> Trajectory:
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=complex)
        if np.any(np.diff(times) <= 0):
            raise InvalidParameterError("snapshot times must be strictly increasing")
        return cls(
            grid=grid,
            times=times,
            values=values,
            step_times=times.copy(),
            step_l2=lp_norms(values, grid.dx, 2),
            step_l10=lp_norms(values, grid.dx, 10),
            **kwargs,
        )

    def __len__(self) -> int:
        return len(self.times)

    @property
    def t_start(self) -> float:
        return float(self.step_times[0])

    @property
    def t_end(self) -> float:
        return float(self.step_times[-1])

    def snapshot(self, i: int) -> Field:
        return Field(self.grid, self.values[i], float(self.times[i]))

    @property
    def fields(self) -> list[Field]:
        return [self.snapshot(i) for i in range(len(self.times))]

    def index_of(self, t: float, atol: float = 1e-9) -> int:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > atol * max(1.0, abs(t)):
            raise TimeRangeError(f"t={t} is not a recorded snapshot time")
        return i

    def at(self, t: float) -> Field:
        return self.snapshot(self.index_of(t))

    @property
    def accumulator(self) -> np.ndarray:
        """Running value of int_0^t ||u||_{L^10}^5 ds at every step time."""
        if self.power_history is not None:
            return self.power_history
        dt = np.diff(self.step_times)
        return np.concatenate([[0.0], np.cumsum(dt * self.step_l10[:-1] ** 5)])

    def final_accumulator(self) -> StrichartzAccumulator:
        return StrichartzAccumulator(float(self.accumulator[-1]), float(self.step_l2.max()))

    def _check_span(self, t0: float, t1: float) -> None:
        tol = 1e-9 * max(1.0, abs(self.t_end))
        if t0 > t1 or t0 < self.t_start - tol or t1 > self.t_end + tol:
            raise TimeRangeError(
                f"[{t0}, {t1}] not inside trajectory span [{self.t_start}, {self.t_end}]"
            )


def x2_norm(traj: Trajectory, t0: float | None = None, t1: float | None = None) -> float:
    """L^5_t L^10_x norm over [t0, t1] by left-endpoint Riemann sum."""
    t0 = traj.t_start if t0 is None else t0
    t1 = traj.t_end if t1 is None else t1
    traj._check_span(t0, t1)
    s = traj.step_times
    lo = np.clip(s[:-1], t0, t1)
    hi = np.clip(s[1:], t0, t1)
    integral = float(np.sum((hi - lo) * traj.step_l10[:-1] ** 5))
    return integral ** 0.2


def x1_norm(traj: Trajectory, t0: float | None = None, t1: float | None = None) -> float:
    """sup_t ||u(t)||_{L^2} over the steps whose interval meets [t0, t1]."""
    t0 = traj.t_start if t0 is None else t0
    t1 = traj.t_end if t1 is None else t1
    traj._check_span(t0, t1)
    s = traj.step_times
    nxt = np.append(s[1:], s[-1])
    active = (s <= t1) & ((nxt > t0) | (s >= t0))
    return float(traj.step_l2[active].max())


def x_norm(traj: Trajectory, t0: float | None = None, t1: float | None = None) -> float:
    return x1_norm(traj, t0, t1) + x2_norm(traj, t0, t1)


def difference(a: Trajectory, b: Trajectory) -> Trajectory:
    """Snapshot-wise difference a - b; both must share the snapshot times."""
    if a.values.shape != b.values.shape or not np.allclose(a.times, b.times, rtol=0, atol=1e-12):
        raise InvalidParameterError("trajectories are not sampled on the same times")
    return Trajectory.from_arrays(a.grid, a.times, a.values - b.values)
