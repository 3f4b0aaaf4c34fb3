"""Monte Carlo surrogate for L^rho_omega norms of pathwise space-time norms."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from ..errors import BlowUpError, InvalidParameterError, LabError
from ..integrator import SolverConfig, relative_mass_drift, solve_batch
from ..spectral import Field, Trajectory, x2_norm, x_norm

# Paths per work item.  Fixed, so that the batch a path is integrated in
# never depends on the thread count.
PATH_CHUNK = 16
BOOTSTRAP_RESAMPLES = 200
_BOOTSTRAP_DOMAIN = 0xB007


class ExperimentFailure(LabError):
    """An experiment could not complete; names the offending path if any."""

    def __init__(self, message: str, path: int | None = None):
        super().__init__(message if path is None else f"{message} [path {path}]")
        self.path = path


def parallel_map(fn: Callable, items: Iterable, threads: int = 1) -> list:
    """``[fn(x) for x in items]`` on a thread pool, results in input order."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def chunks(paths: Sequence[int], size: int = PATH_CHUNK) -> list[tuple[int, ...]]:
    paths = tuple(paths)
    return [paths[i:i + size] for i in range(0, len(paths), size)]


def power_mean(samples: np.ndarray, rho: float) -> float:
    """(mean |s|^rho)^(1/rho), scaled to avoid overflow."""
    s = np.abs(np.asarray(samples, dtype=float))
    if s.size == 0:
        raise InvalidParameterError("need at least one sample")
    top = s.max()
    if top == 0:
        return 0.0
    return float(top * np.mean((s / top) ** rho) ** (1.0 / rho))


@dataclass(frozen=True)
class LomegaEstimate:
    value: float
    standard_error: float
    paths: int
    rho: float = 5.0

    @classmethod
    def from_samples(cls, samples, rho: float, seed: int = 0) -> LomegaEstimate:
        samples = np.asarray(samples, dtype=float)
        value = power_mean(samples, rho)
        P = samples.size
        if P < 2 or np.all(samples == samples[0]):
            return cls(value, 0.0, P, rho)
        rng = np.random.default_rng([int(seed), _BOOTSTRAP_DOMAIN, P])
        idx = rng.integers(0, P, size=(BOOTSTRAP_RESAMPLES, P))
        boot = [power_mean(samples[row], rho) for row in idx]
        return cls(value, float(np.std(boot, ddof=1)), P, rho)

    def interval(self, z: float = 1.96) -> tuple[float, float]:
        return self.value - z * self.standard_error, self.value + z * self.standard_error


@dataclass
class PathSummary:
    path: int
    x: float
    x2: float
    stopping_time: float | None
    mass_drift: float
    boundary_fraction: float


def summarize(traj: Trajectory, path: int) -> PathSummary:
    return PathSummary(
        path=path,
        x=x_norm(traj),
        x2=x2_norm(traj),
        stopping_time=traj.stopping_time,
        mass_drift=relative_mass_drift(traj),
        boundary_fraction=float(traj.meta.get("boundary_fraction", 0.0)),
    )


def run_batch(u0: Field, cfg: SolverConfig, paths: Sequence[int], seed: int) -> list[Trajectory]:
    """solve_batch, with blow-ups reported as experiment failures."""
    try:
        return solve_batch(u0, cfg, paths=tuple(paths), seed=seed)
    except BlowUpError as exc:
        raise ExperimentFailure(f"path blew up: {exc}", exc.path) from exc


def run_paths(u0: Field, cfg: SolverConfig, P: int, seed: int, threads: int = 1) -> list[PathSummary]:
    """Integrate paths 0..P-1 and summarize each; deterministic in P and seed.

    Without noise all paths coincide, so a single run stands in for them.
    """
    if P < 1:
        raise InvalidParameterError("need at least one path")
    if not cfg.stochastic:
        s = summarize(run_batch(u0, cfg, (0,), seed)[0], 0)
        return [PathSummary(p, s.x, s.x2, s.stopping_time, s.mass_drift, s.boundary_fraction)
                for p in range(P)]

    def work(block):
        return [summarize(t, p) for t, p in zip(run_batch(u0, cfg, block, seed), block)]

    out = []
    for part in parallel_map(work, chunks(range(P)), threads):
        out.extend(part)
    return out


def estimate_lomega(
    cfg: SolverConfig,
    u0: Field,
    P: int,
    rho: float = 5.0,
    *,
    seed: int = 0,
    threads: int = 1,
    norm: str = "x",
) -> LomegaEstimate:
    """Power-mean estimate of ||u||_{L^rho_omega X(0,T)} over P common-seed paths."""
    if rho < 1:
        raise InvalidParameterError("rho must be >= 1")
    summaries = run_paths(u0, cfg, P, seed, threads)
    return estimate_from_summaries(summaries, rho, seed, norm)


def estimate_from_summaries(summaries: list[PathSummary], rho: float, seed: int,
                            norm: str = "x") -> LomegaEstimate:
    if norm not in ("x", "x2"):
        raise InvalidParameterError("norm must be 'x' or 'x2'")
    samples = np.array([getattr(s, norm) for s in summaries])
    if not np.all(np.isfinite(samples)):
        bad = int(np.nonzero(~np.isfinite(samples))[0][0])
        raise ExperimentFailure("non-finite path norm", summaries[bad].path)
    return LomegaEstimate.from_samples(samples, rho, seed)


def standard_error_of_mean(samples) -> float:
    samples = np.asarray(samples)
    return float(np.std(samples, ddof=1) / math.sqrt(samples.size)) if samples.size > 1 else 0.0
