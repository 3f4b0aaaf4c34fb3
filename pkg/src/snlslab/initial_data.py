"""Named analytic initial data, normalized to a prescribed L^2 norm."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .spectral import Field, SpectralGrid, lp_norms


def _gaussian(x, center=0.0, width=1.0, freq=0.0):
    return np.exp(-(((x - center) / width) ** 2)) * np.exp(1j * freq * x)


FAMILIES = {
    "gaussian": lambda x: _gaussian(x),
    "modulated": lambda x: _gaussian(x, freq=2.0),
    "two_bump": lambda x: _gaussian(x, -4.0) + _gaussian(x, 4.0, freq=-1.0),
    "zero": lambda x: np.zeros_like(x, dtype=complex),
}


@dataclass(frozen=True)
class DataSpec:
    family: str
    norm: float

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidParameterError(
                f"unknown data family {self.family!r}; choose from {sorted(FAMILIES)}"
            )
        if self.norm < 0:
            raise InvalidParameterError("L2 norm must be >= 0")

    @property
    def label(self) -> str:
        return f"{self.family}@{self.norm:g}"

    def build(self, grid: SpectralGrid) -> Field:
        values = np.asarray(FAMILIES[self.family](grid.x), dtype=complex)
        current = float(lp_norms(values, grid.dx, 2))
        if current > 0:
            values = values * (self.norm / current)
        elif self.norm > 0:
            raise InvalidParameterError(f"family {self.family!r} cannot carry nonzero norm")
        return Field(grid, values, 0.0)


def default_bank(norms=(1.0, 2.0)) -> list[DataSpec]:
    return [DataSpec(f, M) for M in norms for f in ("gaussian", "modulated", "two_bump")]


def random_smooth_field(grid: SpectralGrid, rng: np.random.Generator,
                        width: float = 2.0, bandwidth: float = 3.0) -> Field:
    """Random band-limited field localized near the origin, unit L^2 norm."""
    k = grid.k
    coeffs = (rng.standard_normal(grid.points) + 1j * rng.standard_normal(grid.points))
    coeffs *= np.exp(-((k / bandwidth) ** 2))
    values = np.fft.ifft(coeffs) * np.exp(-((grid.x / width) ** 2))
    values /= lp_norms(values, grid.dx, 2)
    return Field(grid, values, 0.0)


def sech_profile(grid: SpectralGrid, amplitude: float = 1.0) -> Field:
    return Field(grid, amplitude / np.cosh(grid.x) + 0j, 0.0)


def gaussian_mass(width: float = 1.0) -> float:
    return width * math.sqrt(math.pi / 2)
