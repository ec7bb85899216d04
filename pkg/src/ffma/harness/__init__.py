"""Experiment harness: configuration, link simulation, sweeps, replay and CLI."""

from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .replay import replay_examples
from .sweep import SweepResult, emit, run_sweep
from .system import System

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "SweepResult",
    "System",
    "emit",
    "load_config",
    "parse_config",
    "replay_examples",
    "run_sweep",
]
