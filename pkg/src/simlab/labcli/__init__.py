"""Config-driven experiment runner and command-line interface."""
from ..numkit.matrixio import matrix_io_roundtrip
from .cli import main
from .config import ExperimentConfig, Input, load_config, loads_config, resolve_input
from .runner import Report, run_experiment
from .suites import SUITES, SuiteSummary, verify_suite

__all__ = [
    "ExperimentConfig", "Input", "Report", "SUITES", "SuiteSummary", "load_config",
    "loads_config", "main", "matrix_io_roundtrip", "resolve_input", "run_experiment",
    "verify_suite",
]
