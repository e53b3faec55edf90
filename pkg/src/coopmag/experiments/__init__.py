"""Scenario configuration, runners and persistence."""

from .config import ScenarioConfig, from_dict, load, loads
from .disorder import sample_disordered_positions
from .runner import RunManifest, run_disorder_ensemble, run_scenario

__all__ = [
    "RunManifest",
    "ScenarioConfig",
    "from_dict",
    "load",
    "loads",
    "run_disorder_ensemble",
    "run_scenario",
    "sample_disordered_positions",
]
