"""Run configuration and its INI-style file format.

Example::

    [grid]
    half_length = 20*pi
    points = 1024

    [solver]
    eps = 0, 0.125, 0.25
    m = 0.5, 1, inf
    dt = 0.01

Unknown sections or keys are rejected, and every error names the section,
key and line it came from.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from ..errors import ConfigError
from ..initial_data import FAMILIES, DataSpec
from ..integrator import SCHEMES, SolverConfig
from ..noise import NoiseModel, build_noise_model
from ..nonlinearity import PROFILES, CutoffSpec, NonlinearityExponent
from ..spectral import INF, SpectralGrid

EPS_GRID = tuple(i / 8 for i in range(9))
M_GRID = (0.5, 1.0, 2.0, 4.0, 8.0, INF)
EXECUTION_ONLY = ("threads", "out_dir")


@dataclass
class RunConfig:
    # grid
    half_length: float = 20 * math.pi
    points: int = 1024
    # solver parameter grid
    eps: tuple = EPS_GRID
    m: tuple = M_GRID
    mu: tuple = (1.0,)
    A: tuple = (0.0,)
    dt: float = 0.01
    horizon: float = 1.0
    scheme: str = "strang"
    profile: str = "bump"
    # initial-data bank
    families: tuple = ("gaussian",)
    norms: tuple = (1.0, 2.0)
    # noise
    rank: int = 8
    decay: float = 2.0
    width: float = 2.0
    strength: float = 1.0
    K: int = 2
    n_smooth: int = 2
    # Monte Carlo
    paths: int = 64
    rho: float = 5.0
    seed: int = 20180711
    threads: int = 1
    # experiment-specific
    stopping_pairs: tuple = ((0.5, 1.0), (1.0, 2.0), (2.0, 4.0))
    stopping_eps: float = 0.5
    stability_eps: float = 0.0
    stability_m: float = 1.0
    stability_A: float = 1.2
    deltas: tuple = (1e-3, 1e-4, 1e-5)
    dispersive_half_length: float = 256 * math.pi
    dispersive_points: int = 16384
    # output
    out_dir: str = "runs"

    def __post_init__(self):
        self.validate()

    # ------------------------------------------------------------------
    def validate(self) -> None:
        def bad(key, msg):
            raise ConfigError(f"{key}: {msg}")

        if self.paths < 1:
            bad("paths", "must be >= 1")
        if self.rho < 5:
            bad("rho", "must be >= 5")
        if not 0 <= self.seed < 2**64:
            bad("seed", "must be an unsigned 64-bit integer")
        if self.threads < 1:
            bad("threads", "must be >= 1")
        for e in self.eps:
            if not 0 <= e <= 1:
                bad("eps", f"{e} outside [0, 1]")
        for mu in self.mu:
            if not 0 <= mu <= 1:
                bad("mu", f"{mu} outside [0, 1]")
        for m in self.m:
            if not (m == INF or m > 0):
                bad("m", f"{m} must be positive or inf")
        for a in self.A:
            if a < 0:
                bad("A", f"{a} must be >= 0")
        if self.scheme not in SCHEMES:
            bad("scheme", f"must be one of {SCHEMES}")
        if self.profile not in PROFILES:
            bad("profile", f"must be one of {sorted(PROFILES)}")
        for fam in self.families:
            if fam not in FAMILIES:
                bad("families", f"unknown family {fam!r}")
        for pair in self.stopping_pairs:
            if len(pair) != 2 or not 0 < pair[0] < pair[1]:
                bad("stopping_pairs", f"need m1 < m2, got {pair}")
        if not self.eps or not self.m:
            bad("eps/m", "parameter grids must be non-empty")
        if "zero" in self.families and any(M != 0 for M in self.norms):
            bad("norms", "the zero family needs norms = 0")
        try:
            self.grid()
            self.solver_config()
        except Exception as exc:  # surface library validation as config errors
            raise ConfigError(str(exc)) from exc

    # ------------------------------------------------------------------
    def grid(self) -> SpectralGrid:
        return SpectralGrid(float(self.half_length), int(self.points))

    def dispersive_grid(self) -> SpectralGrid:
        return SpectralGrid(float(self.dispersive_half_length), int(self.dispersive_points))

    def noise_model(self, grid: SpectralGrid | None = None) -> NoiseModel:
        grid = grid or self.grid()
        return build_noise_model(
            self.rank, self.decay, self.width, grid,
            strength=self.strength, K=self.K, n_smooth=self.n_smooth,
        )

    def solver_config(self, eps=None, m=None, mu=None, A=None, *, noise=None,
                      record_stride=None) -> SolverConfig:
        eps = self.eps[0] if eps is None else eps
        m = self.m[0] if m is None else m
        mu = self.mu[0] if mu is None else mu
        A = self.A[0] if A is None else A
        n_steps = round(self.horizon / self.dt)
        return SolverConfig(
            exponent=NonlinearityExponent(eps, mu),
            cutoff=CutoffSpec(m, A, self.profile),
            dt=self.dt,
            horizon=self.horizon,
            noise=noise,
            scheme=self.scheme,
            record_stride=n_steps if record_stride is None else record_stride,
        )

    def bank(self) -> list[DataSpec]:
        return [DataSpec(f, M) for M in self.norms for f in self.families]

    def manifest(self) -> dict:
        """Everything that determines the numbers; thread count and output place do not."""
        d = asdict(self)
        return {k: _jsonable(v) for k, v in d.items() if k not in EXECUTION_ONLY}


def _jsonable(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


# --------------------------------------------------------------------------
# file format

# section -> {key in file: RunConfig attribute}
SCHEMA = {
    "grid": {"half_length": "half_length", "points": "points"},
    "solver": {
        "eps": "eps", "m": "m", "mu": "mu", "A": "A", "dt": "dt",
        "horizon": "horizon", "scheme": "scheme", "profile": "profile",
    },
    "data": {"families": "families", "norms": "norms"},
    "noise": {
        "rank": "rank", "decay": "decay", "width": "width", "strength": "strength",
        "K": "K", "n_smooth": "n_smooth",
    },
    "montecarlo": {"paths": "paths", "rho": "rho", "seed": "seed", "threads": "threads"},
    "stopping": {"pairs": "stopping_pairs", "eps": "stopping_eps"},
    "stability": {"eps": "stability_eps", "m": "stability_m", "A": "stability_A", "deltas": "deltas"},
    "dispersive": {"half_length": "dispersive_half_length", "points": "dispersive_points"},
    "output": {"directory": "out_dir"},
}

_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)?\s*(\*?\s*pi)?\s*$")


def parse_real(text: str) -> float:
    """Float, ``inf``, ``pi`` or ``<number>*pi``."""
    t = text.strip().lower()
    if t in ("inf", "infinity", "+inf"):
        return INF
    m = _NUMBER.match(t)
    if not m or (m.group(1) is None and m.group(2) is None):
        raise ValueError(f"cannot parse {text!r} as a number")
    base = float(m.group(1)) if m.group(1) is not None else 1.0
    return base * math.pi if m.group(2) else base


def _parse_int(text: str) -> int:
    v = int(text.strip(), 0)
    return v


def _parse_pairs(text: str) -> tuple:
    out = []
    for chunk in text.split(","):
        if not chunk.strip():
            continue
        a, _, b = chunk.partition(":")
        if not b:
            raise ValueError(f"pair {chunk.strip()!r} must look like m1:m2")
        out.append((parse_real(a), parse_real(b)))
    return tuple(out)


def _converter(attr: str):
    default = {f.name: f.default for f in fields(RunConfig)}[attr]
    if attr == "stopping_pairs":
        return _parse_pairs
    if attr == "families":
        return lambda s: tuple(x.strip() for x in s.split(",") if x.strip())
    if isinstance(default, tuple):
        return lambda s: tuple(parse_real(x) for x in s.split(",") if x.strip())
    if isinstance(default, bool):
        return lambda s: s.strip().lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return _parse_int
    if isinstance(default, float):
        return parse_real
    return lambda s: s.strip()


def _line_numbers(text: str) -> dict:
    """(section, key) -> 1-based line number, for diagnostics."""
    lines = {}
    section = None
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            lines[(section, None)] = i
        elif section and line and line[0] not in "#;" and ("=" in line or ":" in line):
            key = re.split(r"[=:]", line, maxsplit=1)[0].strip()
            lines[(section, key)] = i
    return lines


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    where = _line_numbers(text)
    values = {}
    for section in parser.sections():
        line = where.get((section, None), "?")
        if section not in SCHEMA:
            raise ConfigError(f"{source}:{line}: unknown section [{section}]; expected one of {sorted(SCHEMA)}")
        for key, raw in parser.items(section):
            line = where.get((section, key), "?")
            attr = SCHEMA[section].get(key)
            if attr is None:
                raise ConfigError(
                    f"{source}:{line}: unknown key {key!r} in [{section}]; expected one of {sorted(SCHEMA[section])}"
                )
            try:
                values[attr] = _converter(attr)(raw)
            except ValueError as exc:
                raise ConfigError(f"{source}:{line}: [{section}] {key}: {exc}") from exc
    try:
        return RunConfig(**values)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, str(path))


def dump_config(rc: RunConfig) -> str:
    """Render a RunConfig in the file format (round-trips through the parser)."""

    def fmt(v):
        if isinstance(v, tuple) and v and isinstance(v[0], tuple):
            return ", ".join(f"{fmt(a)}:{fmt(b)}" for a, b in v)
        if isinstance(v, tuple):
            return ", ".join(fmt(x) for x in v)
        if isinstance(v, float):
            return "inf" if math.isinf(v) else repr(v)
        return str(v)

    out = []
    for section, keys in SCHEMA.items():
        out.append(f"[{section}]")
        for key, attr in keys.items():
            out.append(f"{key} = {fmt(getattr(rc, attr))}")
        out.append("")
    return "\n".join(out)


def override(rc: RunConfig, **changes) -> RunConfig:
    d = {f.name: getattr(rc, f.name) for f in fields(RunConfig)}
    d.update({k: v for k, v in changes.items() if v is not None})
    return RunConfig(**d)


__all__ = [
    "RunConfig", "parse_config_text", "load_config", "dump_config", "override",
    "parse_real", "EPS_GRID", "M_GRID", "EXECUTION_ONLY",
]
