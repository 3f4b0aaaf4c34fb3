"""Finite-rank trace-class noise W = Phi W~ on the grid.

Phi maps an orthonormal input basis e_1..e_R (scaled Hermite functions) to
c_k g_k, where g_k are smooth, real, orthonormal envelopes and c_k decay
polynomially; Phi vanishes on the orthogonal complement of span{e_k}.

Random numbers are drawn from counter-based Philox substreams addressed by
(seed, path, step), so the increment used at a given path and step does not
depend on anything else about the run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, ResolutionError
from .spectral import Field, SpectralGrid, forward, inverse

MASK64 = (1 << 64) - 1


def hermite_functions(y: np.ndarray, count: int) -> np.ndarray:
    """Orthonormal Hermite functions h_0..h_{count-1} at points y (rows)."""
    out = np.zeros((count, y.size))
    if count == 0:
        return out
    out[0] = math.pi**-0.25 * np.exp(-(y**2) / 2)
    if count > 1:
        out[1] = math.sqrt(2.0) * y * out[0]
    for n in range(1, count - 1):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * y * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def _orthonormalize(rows: np.ndarray, dx: float) -> np.ndarray:
    if rows.shape[0] == 0:
        return rows
    q, r = np.linalg.qr(rows.T * math.sqrt(dx))
    q = q * np.sign(np.diag(r))
    return q.T / math.sqrt(dx)


def hilbert_norm(values: np.ndarray, grid: SpectralGrid, K: int, n_smooth: int) -> float:
    """sqrt(sum_{j<=n_smooth} ||(1+|x|^K) d^j f||_{L^2}^2), derivatives spectral."""
    weight = 1.0 + np.abs(grid.x) ** K
    fhat = forward(values)
    total = 0.0
    for j in range(n_smooth + 1):
        deriv = inverse((1j * grid.k) ** j * fhat)
        total += float(np.sum(np.abs(weight * deriv) ** 2) * grid.dx)
    return math.sqrt(total)


@dataclass(frozen=True, eq=False)
class NoiseModel:
    grid: SpectralGrid
    modes: np.ndarray            # (R, N) real, orthonormal on the grid
    singular_values: np.ndarray  # (R,) strictly decreasing
    input_basis: np.ndarray      # (R, N) real, orthonormal on the grid
    K: int = 2
    n_smooth: int = 2
    decay: float = 2.0
    width: float = 2.0
    strength: float = 1.0

    @property
    def rank(self) -> int:
        return self.singular_values.size

    @property
    def images(self) -> np.ndarray:
        """Rows Phi e_k = c_k g_k."""
        return self.singular_values[:, None] * self.modes

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Phi f = sum_k c_k g_k <e_k, f>, with quadrature inner products."""
        coeffs = self.input_basis @ np.asarray(values) * self.grid.dx
        return coeffs @ self.images

    def trace(self) -> float:
        return float(self.singular_values.sum())

    def field_from_gaussians(self, xi: np.ndarray, dt: float) -> np.ndarray:
        """sqrt(dt) sum_k c_k xi_k g_k; ``xi`` may carry leading batch axes."""
        if self.rank == 0:
            return np.zeros(np.shape(xi)[:-1] + (self.grid.points,))
        return math.sqrt(dt) * (np.asarray(xi) @ self.images)

    def describe(self) -> dict:
        return {
            "rank": self.rank,
            "decay": self.decay,
            "width": self.width,
            "strength": self.strength,
            "K": self.K,
            "n_smooth": self.n_smooth,
        }


def build_noise_model(
    rank: int,
    decay: float,
    width: float,
    grid: SpectralGrid,
    *,
    strength: float = 1.0,
    K: int = 2,
    n_smooth: int = 2,
    boundary_tol: float = 1e-12,
) -> NoiseModel:
    """Rank-R model with c_k = strength * (1+k)^(-decay), k = 1..R.

    Input basis: e_k(x) = width^(-1/2) h_{k-1}(x/width).  Modes: the envelopes
    exp(-x^2 / (2 width^2)) h_{k-1}(x/width), re-orthonormalized on the grid.
    """
    if rank < 0:
        raise InvalidParameterError("rank must be >= 0")
    if not decay > 1:
        raise InvalidParameterError("decay exponent must exceed 1")
    if not width > 0 or not strength > 0:
        raise InvalidParameterError("width and strength must be positive")
    if K < 0 or n_smooth < 0:
        raise InvalidParameterError("weight exponents must be >= 0")
    if rank > grid.points // 8:
        raise ResolutionError(f"rank {rank} exceeds grid capacity {grid.points // 8}")
    y = grid.x / width
    basis = hermite_functions(y, rank) / math.sqrt(width)
    envelopes = np.exp(-(y**2) / 2) * hermite_functions(y, rank)
    modes = _orthonormalize(envelopes, grid.dx)
    c = strength * (1.0 + np.arange(1, rank + 1)) ** -decay
    model = NoiseModel(grid, modes, c, basis, K, n_smooth, decay, width, strength)
    if rank:
        gram = basis @ basis.T * grid.dx
        if np.max(np.abs(gram - np.eye(rank))) > 1e-12:
            raise ResolutionError("input basis is not resolved: Hermite functions lose orthonormality")
        for arr in (basis, modes):
            edge = np.abs(arr[:, grid.boundary_mask()]).max()
            if edge > boundary_tol * np.abs(arr).max():
                raise ResolutionError("noise modes do not decay inside the box")
        # oscillations beyond the resolved band alias silently; refuse instead
        tail = np.abs(forward(modes))[:, np.abs(grid.k) > 0.5 * grid.k_max]
        if tail.size and tail.max() > 1e-10 * np.abs(forward(modes)).max():
            raise ResolutionError("noise modes are not resolved on the grid")
    return model


def zero_noise(grid: SpectralGrid) -> NoiseModel:
    return build_noise_model(0, 2.0, 1.0, grid)


def homogeneous_noise(grid: SpectralGrid, amplitude: float) -> NoiseModel:
    """Rank one, spatially constant mode: F = amplitude^2 / (2L) everywhere.

    Periodic in the box, so it is a valid model on the grid even though it
    does not decay; used where a constant correction F is needed.
    """
    if amplitude <= 0:
        raise InvalidParameterError("amplitude must be positive")
    mode = np.full((1, grid.points), 1.0 / math.sqrt(2 * grid.half_length))
    basis = hermite_functions(grid.x, 1)
    return NoiseModel(grid, mode, np.array([float(amplitude)]), basis, strength=float(amplitude))


def ito_stratonovich_correction(model: NoiseModel) -> np.ndarray:
    """F(x) = sum_k (Phi e_k)(x)^2, a real field on the grid."""
    if model.rank == 0:
        return np.zeros(model.grid.points)
    return np.sum(model.images**2, axis=0)


def correction_in_basis(model: NoiseModel, basis: np.ndarray) -> np.ndarray:
    """sum_i (Phi b_i)^2 for orthonormal rows b_i, computed by applying Phi."""
    images = np.array([model.apply(b) for b in basis]).real
    return np.sum(images**2, axis=0)


# --------------------------------------------------------------------------
# random numbers


def substream(seed: int, path: int, step: int) -> np.random.Generator:
    """Independent generator for (seed, path, step)."""
    if path < 0 or step < 0:
        raise InvalidParameterError("path and step must be nonnegative")
    counter = np.array([0, step, path, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=int(seed) & MASK64, counter=counter))


def step_gaussians(seed: int, path: int, step: int, rank: int) -> np.ndarray:
    return substream(seed, path, step).standard_normal(rank)


def path_gaussians(seed: int, path: int, n_steps: int, rank: int) -> np.ndarray:
    """(n_steps, rank) standard normals for one path."""
    out = np.empty((n_steps, rank))
    if rank == 0:
        return out
    for n in range(n_steps):
        out[n] = step_gaussians(seed, path, n, rank)
    return out


@dataclass
class NoiseStream:
    """Position (path, step) in the counter-based stream of one master seed."""

    seed: int
    path: int = 0
    step: int = 0

    def next_gaussians(self, rank: int) -> np.ndarray:
        xi = step_gaussians(self.seed, self.path, self.step, rank)
        self.step += 1
        return xi


@dataclass(frozen=True, eq=False)
class NoiseIncrement:
    """delta_w = sqrt(dt) sum_k c_k xi_k g_k, stored with the xi_k that built it."""

    delta_w: np.ndarray
    dt: float
    gaussians: np.ndarray

    def as_field(self, grid: SpectralGrid, time: float = 0.0) -> Field:
        return Field(grid, self.delta_w.astype(complex), time)


def sample_increment(model: NoiseModel, dt: float, stream: NoiseStream) -> NoiseIncrement:
    if not dt > 0:
        raise InvalidParameterError("dt must be positive")
    xi = stream.next_gaussians(model.rank)
    return NoiseIncrement(model.field_from_gaussians(xi, dt), dt, xi)
