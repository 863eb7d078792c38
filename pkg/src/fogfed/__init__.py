"""Discrete-event simulator for federated fog computing."""

from .config import ScenarioConfig, build_scenario, bundled_config, dump_config, load_config, parse_config
from .engine import MetricsReport, run
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "MetricsReport",
    "ScenarioConfig",
    "build_scenario",
    "bundled_config",
    "dump_config",
    "load_config",
    "parse_config",
    "run",
]
