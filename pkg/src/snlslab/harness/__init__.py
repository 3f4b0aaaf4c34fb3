"""Configuration, Monte Carlo estimation, experiments, output and CLI."""

from .config import RunConfig, load_config, parse_config_text
from .montecarlo import ExperimentFailure, LomegaEstimate, estimate_lomega
from .output import ExperimentResult

__all__ = [
    "RunConfig", "load_config", "parse_config_text",
    "ExperimentFailure", "LomegaEstimate", "estimate_lomega", "ExperimentResult",
]
