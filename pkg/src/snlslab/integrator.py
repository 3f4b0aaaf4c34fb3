"""Split-step integrators for the truncated (stochastic) defocusing NLS

    i u_t + u_xx = theta_m(A + int_0^t ||u||_{L^10}^5 ds) mu |u|^(4-eps) u + u o dW/dt

Every substep is solved exactly:

* linear: the spectral multiplier exp(-i k^2 h);
* nonlinear: u <- u exp(-i c mu |u|^(4-eps) dt), valid because |u| is
  invariant under that flow; c is the cutoff factor frozen at step start;
* noise: u <- u exp(-i dW), the Stratonovich phase.  Its Ito expansion
  produces the -F/2 u drift, so no explicit correction term is applied;
* forcing (stability runs only): u <- u - i e dt.

Strang ordering is half linear / pointwise / half linear; Lie is full
linear / pointwise.  All pointwise substeps commute with each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import BlowUpError, InvalidParameterError, TimeRangeError
from .noise import NoiseIncrement, NoiseModel, ito_stratonovich_correction, path_gaussians
from .nonlinearity import (
    CutoffSpec,
    NonlinearityExponent,
    nonlinearity_values,
    theta,
    truncation_factor,
)
from .propagator import free_multiplier
from .spectral import (
    INF,
    Field,
    SpectralGrid,
    StrichartzAccumulator,
    Trajectory,
    boundary_mass_fraction,
    difference,
    forward,
    inverse,
    l2_l10_norms,
    lp_norms,
    spectral_tail_fraction,
    x_norm,
)

MASS_DRIFT_ABORT = 1e-6
SCHEMES = ("strang", "lie")


@dataclass(frozen=True)
class SolverConfig:
    exponent: NonlinearityExponent = NonlinearityExponent()
    cutoff: CutoffSpec = CutoffSpec()
    dt: float = 1e-3
    horizon: float = 1.0
    noise: NoiseModel | None = None
    scheme: str = "strang"
    record_stride: int = 1

    def __post_init__(self):
        if not self.dt > 0 or not self.horizon > 0:
            raise InvalidParameterError("dt and horizon must be positive")
        if self.dt > self.horizon * (1 + 1e-12):
            raise InvalidParameterError("dt must not exceed the horizon")
        n = round(self.horizon / self.dt)
        if abs(n * self.dt - self.horizon) > 1e-9 * self.horizon:
            raise InvalidParameterError(
                f"horizon {self.horizon} is not an integer multiple of dt {self.dt}"
            )
        if self.scheme not in SCHEMES:
            raise InvalidParameterError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.record_stride < 1:
            raise InvalidParameterError("record_stride must be >= 1")

    @property
    def n_steps(self) -> int:
        return round(self.horizon / self.dt)

    @property
    def stochastic(self) -> bool:
        return self.noise is not None and self.noise.rank > 0

    def with_(self, **changes) -> SolverConfig:
        return replace(self, **changes)

    def describe(self) -> dict:
        return {
            "eps": self.exponent.eps,
            "mu": self.exponent.mu,
            "m": self.cutoff.m,
            "A": self.cutoff.A,
            "dt": self.dt,
            "T": self.horizon,
            "scheme": self.scheme,
            "noise_rank": self.noise.rank if self.noise is not None else 0,
        }


@lru_cache(maxsize=64)
def _multipliers(grid: SpectralGrid, dt: float, scheme: str) -> np.ndarray:
    h = dt / 2 if scheme == "strang" else dt
    m = free_multiplier(grid, h)
    m.flags.writeable = False
    return m


def _advance(U, grid, cfg: SolverConfig, factor, delta_w=None, forcing=None, *, mu=None, power=None):
    """One step on values with arbitrary leading batch axes.

    ``mu`` and ``power`` default to ``cfg.exponent``; batched runs pass
    per-row columns instead.
    """
    mu = cfg.exponent.mu if mu is None else mu
    power = cfg.exponent.power if power is None else power
    mult = _multipliers(grid, cfg.dt, cfg.scheme)
    U = inverse(forward(U) * mult)
    # nonlinear and noise substeps are commuting pointwise phases, applied at once
    coupling = np.asarray(factor) * mu * cfg.dt
    if np.any(coupling != 0):
        phase = coupling * np.abs(U) ** power
        if delta_w is not None:
            phase = phase + delta_w
        U = U * np.exp(-1j * phase)
    elif delta_w is not None:
        U = U * np.exp(-1j * delta_w)
    if forcing is not None:
        U = U - 1j * cfg.dt * forcing
    if cfg.scheme == "strang":
        U = inverse(forward(U) * mult)
    return U


def _check_finite(values, f_time, path=None):
    if not np.all(np.isfinite(values)):
        raise BlowUpError("non-finite values", f_time, path)


def step_deterministic(f: Field, cfg: SolverConfig, acc: StrichartzAccumulator) -> Field:
    """Advance f by cfg.dt without noise; updates ``acc`` in place."""
    c = truncation_factor(acc, cfg.cutoff)
    new = _advance(f.values, f.grid, cfg, c)
    _check_finite(new, f.time + cfg.dt)
    acc.advance(f, cfg.dt)
    out = f.replace(new, f.time + cfg.dt)
    acc.observe(out)
    return out


def step_stochastic(
    f: Field, cfg: SolverConfig, acc: StrichartzAccumulator, increment: NoiseIncrement
) -> Field:
    """As :func:`step_deterministic` with the Stratonovich noise phase exp(-i dW)."""
    if abs(increment.dt - cfg.dt) > 1e-15 * cfg.dt:
        raise InvalidParameterError("increment dt differs from the solver dt")
    c = truncation_factor(acc, cfg.cutoff)
    dw = increment.delta_w if np.any(increment.delta_w) else None
    new = _advance(f.values, f.grid, cfg, c, dw)
    _check_finite(new, f.time + cfg.dt)
    acc.advance(f, cfg.dt)
    out = f.replace(new, f.time + cfg.dt)
    acc.observe(out)
    return out


# --------------------------------------------------------------------------
# whole runs


@lru_cache(maxsize=8)
def _crn_gaussians(seed: int, paths: tuple, n_steps: int, rank: int) -> np.ndarray:
    out = np.stack([path_gaussians(seed, p, n_steps, rank) for p in paths])
    out.flags.writeable = False
    return out


def crn_gaussians(seed: int, paths: Sequence[int], n_steps: int, rank: int) -> np.ndarray:
    """(P, n_steps, R) normals; identical for every solver parameter (CRN)."""
    return _crn_gaussians(int(seed), tuple(int(p) for p in paths), int(n_steps), int(rank))


Forcing = Callable[[float], np.ndarray]


def _as_forcing(forcing, grid: SpectralGrid) -> Forcing | None:
    if forcing is None:
        return None
    if isinstance(forcing, Field):
        vals = forcing.values
        return lambda t: vals
    if callable(forcing):
        return forcing
    arr = np.asarray(forcing, dtype=complex)
    if arr.shape != (grid.points,):
        raise InvalidParameterError("forcing must be a Field, a (N,) array or a callable of t")
    return lambda t: arr


def _crossing_time(t0, dt, power_history, l10, A, m):
    """First t with A + int_0^t ||u||^5 >= m for the piecewise-linear integral."""
    if m == INF:
        return None
    level = m - A
    if level <= 0:
        return float(t0)
    hits = np.nonzero(power_history >= level)[0]
    if hits.size == 0:
        return None
    n = int(hits[0]) - 1
    increment = dt * l10[n] ** 5
    frac = (level - power_history[n]) / increment if increment > 0 else 1.0
    return float(t0 + dt * (n + min(max(frac, 0.0), 1.0)))


def _shared_settings(cfg: SolverConfig) -> tuple:
    return (cfg.dt, cfg.horizon, cfg.scheme, cfg.record_stride, cfg.cutoff.profile, id(cfg.noise))


def _row_factor(acc, A, m, finite, profile):
    """theta((A + acc) / m) per row, with exact plateau shortcuts."""
    if not finite.any():
        return 1.0
    x = np.where(finite, (A + acc) / np.where(finite, m, 1.0), 0.0)
    if x.max() <= 1.0:
        return 1.0
    if x.min() >= 2.0:
        return 0.0
    return theta(x, profile)[:, None]


def solve_batch(
    u0: Field | Sequence[Field],
    cfg: SolverConfig | Sequence[SolverConfig],
    *,
    paths: Sequence[int] = (0,),
    seed: int = 0,
    forcing=None,
    gaussians: np.ndarray | None = None,
    check_mass: bool = True,
) -> list[Trajectory]:
    """Integrate one initial field (or one per path) along each noise path.

    ``cfg`` may also be one config per row, differing only in exponent and
    cutoff, which lets a parameter grid advance as one array (repeat a path
    id to give several rows the same noise).  Each row gets its own
    truncation factor and accumulator, so results do not depend on which
    other rows share the batch (up to roundoff: batched FFTs may take
    differently vectorized code paths, so callers wanting bitwise
    reproducibility keep the batch composition fixed).
    """
    fields = [u0] * len(paths) if isinstance(u0, Field) else list(u0)
    if len(fields) != len(paths):
        raise InvalidParameterError("need one initial field per path")
    cfgs = [cfg] * len(paths) if isinstance(cfg, SolverConfig) else list(cfg)
    if len(cfgs) != len(paths):
        raise InvalidParameterError("need one solver config per path")
    cfg = cfgs[0]
    if any(_shared_settings(c) != _shared_settings(cfg) for c in cfgs):
        raise InvalidParameterError("batched configs may differ only in exponent and cutoff")
    grid = fields[0].grid
    t0 = fields[0].time
    P, N, n_steps, dt = len(paths), grid.points, cfg.n_steps, cfg.dt
    U = np.stack([f.values for f in fields]).astype(complex)

    def column(values):
        values = np.array(values, dtype=float)
        return float(values[0]) if np.all(values == values[0]) else values[:, None]

    mu = column([c.exponent.mu for c in cfgs])
    power = column([c.exponent.power for c in cfgs])
    m_row = np.array([c.cutoff.m for c in cfgs], dtype=float)
    A_row = np.array([c.cutoff.A for c in cfgs], dtype=float)
    finite = m_row != INF

    rank = cfg.noise.rank if cfg.stochastic else 0
    if rank:
        if gaussians is None:
            gaussians = crn_gaussians(seed, paths, n_steps, rank)
        if gaussians.shape != (P, n_steps, rank):
            raise InvalidParameterError("gaussians must have shape (paths, steps, rank)")
    force = _as_forcing(forcing, grid)

    stride = cfg.record_stride
    record_steps = list(range(0, n_steps + 1, stride))
    if record_steps[-1] != n_steps:
        record_steps.append(n_steps)
    snaps = np.empty((P, len(record_steps), N), dtype=complex)
    snaps[:, 0] = U
    slot = 1

    l2 = np.empty((P, n_steps + 1))
    l10 = np.empty((P, n_steps + 1))
    history = np.zeros((P, n_steps + 1))
    acc = np.zeros(P)
    l2[:, 0], l10[:, 0] = l2_l10_norms(U, grid.dx)
    mass0 = l2[:, 0] ** 2

    for n in range(n_steps):
        t = t0 + n * dt
        factor = _row_factor(acc, A_row, m_row, finite, cfg.cutoff.profile)
        dw = cfg.noise.field_from_gaussians(gaussians[:, n], dt) if rank else None
        U = _advance(U, grid, cfg, factor, dw, force(t) if force else None, mu=mu, power=power)
        acc = acc + dt * l10[:, n] ** 5
        history[:, n + 1] = acc
        l2[:, n + 1], l10[:, n + 1] = l2_l10_norms(U, grid.dx)
        # any non-finite entry makes the norms non-finite
        if not np.all(np.isfinite(l10[:, n + 1])):
            bad = int(np.nonzero(~np.isfinite(l10[:, n + 1]))[0][0])
            raise BlowUpError("non-finite values", t + dt, paths[bad])
        if check_mass and force is None:
            drift = np.abs(l2[:, n + 1] ** 2 - mass0) / np.where(mass0 > 0, mass0, 1.0)
            if np.any(drift > MASS_DRIFT_ABORT):
                bad = int(np.argmax(drift))
                raise BlowUpError(f"mass drift {drift[bad]:.3g}", t + dt, paths[bad])
        if slot < len(record_steps) and record_steps[slot] == n + 1:
            snaps[:, slot] = U
            slot += 1

    step_times = t0 + dt * np.arange(n_steps + 1)
    snap_times = step_times[record_steps]
    out = []
    for i, p in enumerate(paths):
        cut = cfgs[i].cutoff
        tau = _crossing_time(t0, dt, history[i], l10[i], cut.A, cut.m)
        traj = Trajectory(
            grid=grid,
            times=snap_times,
            values=snaps[i],
            step_times=step_times,
            step_l2=l2[i],
            step_l10=l10[i],
            config=cfgs[i],
            noise_path_id=int(p) if rank else None,
            stopping_time=tau,
            gaussians=gaussians[i] if rank else None,
            offset=cut.A,
            power_history=history[i],
        )
        traj.meta["boundary_fraction"] = boundary_mass_fraction(snaps[i], grid)
        traj.meta["forcing"] = force
        out.append(traj)
    return out


def solve(u0: Field, cfg: SolverConfig, *, path: int = 0, seed: int = 0, forcing=None) -> Trajectory:
    """Integrate to cfg.horizon; records snapshots, norms and the stopping time."""
    return solve_batch(u0, cfg, paths=(path,), seed=seed, forcing=forcing)[0]


def resolution_report(traj: Trajectory) -> dict:
    return {
        "boundary_fraction": boundary_mass_fraction(traj.values, traj.grid),
        "spectral_tail": spectral_tail_fraction(traj.values, traj.grid),
    }


def relative_mass_drift(traj: Trajectory) -> float:
    m = traj.step_l2**2
    return float(np.max(np.abs(m - m[0])) / m[0]) if m[0] > 0 else float(np.max(m))


# --------------------------------------------------------------------------
# Duhamel residual


def duhamel_residual(traj: Trajectory, t: float) -> float:
    """||u(t) - RHS(t)||_{L^2} for the Ito-form mild equation.

    RHS = e^{i(t-a)Lap} u(a) - i sum_n e^{i(t-s_n)Lap} [c_n N(u_n) dt + u_n dW_n]
          - 1/2 sum_n e^{i(t-s_n)Lap} F u_n dt,
    summed over steps s_n < t with the increments the stepper consumed.
    """
    cfg: SolverConfig = traj.config
    if cfg is None or cfg.record_stride != 1:
        raise TimeRangeError("duhamel_residual needs a solver trajectory recorded at every step")
    n = traj.index_of(t)
    grid, dt, a = traj.grid, cfg.dt, traj.t_start
    u = traj.values[:n]
    s = traj.times[:n]
    cut = cfg.cutoff
    power = traj.accumulator[:n]
    c = cut.factor(power)[:, None] if cut.m != INF else 1.0
    terms = -1j * dt * c * nonlinearity_values(u, cfg.exponent)
    if cfg.stochastic and traj.gaussians is not None:
        dW = cfg.noise.field_from_gaussians(traj.gaussians[:n], dt)
        F = ito_stratonovich_correction(cfg.noise)
        terms = terms - 1j * u * dW - 0.5 * dt * F * u
    forcing = traj.meta.get("forcing")
    if forcing is not None:
        terms = terms - 1j * dt * np.stack([forcing(si) for si in s])
    k2 = grid.k**2
    phases = np.exp(1j * np.outer(s - a, k2))
    summed = np.sum(forward(terms) * phases, axis=0) if n else 0.0
    rhs_hat = np.exp(-1j * k2 * (traj.times[n] - a)) * (forward(traj.values[0]) + summed)
    diff = traj.values[n] - inverse(rhs_hat)
    return float(lp_norms(diff, grid.dx, 2))


def expected_linear_field(u0: Field, model: NoiseModel, t: float, steps: int = 1000) -> Field:
    """E u(t) for mu = 0: the flow of i Lap - F/2 applied to u0, by Strang splitting.

    With Gaussian increments E exp(-i dW) = exp(-F dt / 2) exactly, so the
    mean obeys the Ito drift equation.  When F is constant in x the flow is
    exactly exp(-F t / 2) e^{it Lap} u0.
    """
    if steps < 1:
        raise InvalidParameterError("need at least one step")
    grid = u0.grid
    h = t / steps
    half = free_multiplier(grid, h / 2)
    damp = np.exp(-0.5 * h * ito_stratonovich_correction(model))
    U = u0.values
    for _ in range(steps):
        U = inverse(forward(damp * inverse(forward(U) * half)) * half)
    return u0.replace(U, u0.time + t)


# --------------------------------------------------------------------------
# stability


@dataclass
class StabilityReport:
    initial_gap: float
    forcing_size: float
    offset_gap: float
    response: float
    ratio: float
    details: dict = field(default_factory=dict)

    @property
    def input_size(self) -> float:
        return self.initial_gap + self.forcing_size + self.offset_gap


def stability_experiment(
    w0: Field,
    v0: Field,
    forcing,
    cfg_w: SolverConfig,
    cfg_v: SolverConfig | None = None,
) -> StabilityReport:
    """Compare w (unforced, offset A) with v (forced by e, offset A~).

    Returns ||v-w||_X against ||v(a)-w(a)||_{L^2} + ||e||_{L^1 L^2} + |A-A~|.
    """
    cfg_v = cfg_w if cfg_v is None else cfg_v
    if cfg_w.dt != cfg_v.dt or cfg_w.horizon != cfg_v.horizon:
        raise InvalidParameterError("w and v runs must share dt and horizon")
    cfg_w = cfg_w.with_(record_stride=1, noise=None)
    cfg_v = cfg_v.with_(record_stride=1, noise=None)
    w = solve(w0, cfg_w)
    v = solve(v0, cfg_v, forcing=forcing)
    response = x_norm(difference(v, w))
    gap = float(lp_norms(v0.values - w0.values, w0.grid.dx, 2))
    force = _as_forcing(forcing, w0.grid)
    if force is None:
        e_size = 0.0
    else:
        e_norms = [float(lp_norms(np.asarray(force(t)), w0.grid.dx, 2)) for t in w.step_times[:-1]]
        e_size = cfg_w.dt * float(np.sum(e_norms))
    a_gap = abs(cfg_w.cutoff.A - cfg_v.cutoff.A)
    total = gap + e_size + a_gap
    if total > 0:
        ratio = response / total
    else:
        ratio = 0.0 if response == 0 else math.inf
    return StabilityReport(
        gap, e_size, a_gap, response, ratio,
        details={"x_norm_w": x_norm(w), "x_norm_v": x_norm(v)},
    )
