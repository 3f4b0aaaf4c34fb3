"""Defocusing power nonlinearity and the smooth cutoff used to truncate it."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .spectral import INF, Field, StrichartzAccumulator


def _psi(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def _bump(x) -> np.ndarray:
    """C-infinity profile: 1 on [0,1], 0 on [2,inf), monotone in between."""
    x = np.asarray(x, dtype=float)
    out = np.where(x <= 1.0, 1.0, 0.0)
    mid = (x > 1.0) & (x < 2.0)
    if np.any(mid):
        a = _psi(2.0 - x[mid])
        b = _psi(x[mid] - 1.0)
        out[mid] = a / (a + b)
    return out


def _smoothstep(x) -> np.ndarray:
    """C^2 polynomial alternative with the same plateau and support."""
    x = np.asarray(x, dtype=float)
    s = np.clip(x - 1.0, 0.0, 1.0)
    return 1.0 - s**3 * (10.0 - 15.0 * s + 6.0 * s**2)


PROFILES = {"bump": _bump, "smoothstep": _smoothstep}


def theta(x, profile: str = "bump"):
    """Cutoff profile on [0, inf).  Scalars in, float out; arrays in, array out."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise InvalidParameterError("theta is defined on [0, inf) only")
    out = PROFILES[profile](arr)
    return float(out) if out.ndim == 0 else out


def theta_m(x, m: float, profile: str = "bump"):
    """theta(x / m); ``m = INF`` disables the cutoff."""
    if m == INF:
        arr = np.asarray(x, dtype=float)
        return 1.0 if arr.ndim == 0 else np.ones_like(arr)
    if not m > 0:
        raise InvalidParameterError(f"cutoff scale m must be positive, got {m}")
    return theta(np.asarray(x, dtype=float) / m, profile)


@dataclass(frozen=True)
class CutoffSpec:
    """Truncation level ``m`` (``INF`` = none), offset ``A`` and transition profile."""

    m: float = INF
    A: float = 0.0
    profile: str = "bump"

    def __post_init__(self):
        if not (self.m == INF or self.m > 0):
            raise InvalidParameterError(f"cutoff scale m must be positive or INF, got {self.m}")
        if not self.A >= 0:
            raise InvalidParameterError(f"offset A must be >= 0, got {self.A}")
        if self.profile not in PROFILES:
            raise InvalidParameterError(f"unknown cutoff profile {self.profile!r}")

    def factor(self, power_integral):
        return theta_m(self.A + np.asarray(power_integral, dtype=float), self.m, self.profile)


@dataclass(frozen=True)
class NonlinearityExponent:
    """Power 4 - eps and defocusing coupling mu, both in [0, 1]."""

    eps: float = 0.0
    mu: float = 1.0

    def __post_init__(self):
        for name in ("eps", "mu"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidParameterError(f"{name} must lie in [0, 1], got {v}")

    @property
    def power(self) -> float:
        return 4.0 - self.eps


def nonlinearity_values(values: np.ndarray, exp: NonlinearityExponent) -> np.ndarray:
    # |0|^(4-eps) * 0 = 0 without special casing since 4 - eps > 0
    return exp.mu * np.abs(values) ** exp.power * values


def apply_nonlinearity(f: Field, exp: NonlinearityExponent) -> Field:
    """Pointwise mu |f|^(4-eps) f."""
    return f.replace(nonlinearity_values(f.values, exp))


def truncation_factor(acc: StrichartzAccumulator, cut: CutoffSpec) -> float:
    """theta((A + accumulated power integral) / m); 1 when m is infinite."""
    if acc.power_integral < 0:
        raise InvalidParameterError("accumulator must be nonnegative")
    if cut.m == INF:
        return 1.0
    return float(cut.factor(acc.power_integral))


def nonlinear_phase(values: np.ndarray, exp: NonlinearityExponent, factor, dt: float) -> np.ndarray:
    """Exact flow of i u_t = c mu |u|^(4-eps) u over time dt (|u| is conserved)."""
    return values * np.exp(-1j * (np.asarray(factor) * exp.mu * dt) * np.abs(values) ** exp.power)
