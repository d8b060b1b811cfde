"""Environments, experiment configuration, runner and CLI."""

from .config import ExperimentConfig
from .environments import EnvironmentSpec, build_environment
from .runner import read_trace, run_experiment, write_trace
