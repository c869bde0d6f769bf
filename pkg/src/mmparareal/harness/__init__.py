"""Experiment orchestration: sweeps, slope fits, CSV output and the CLI."""

from .config import DEFAULT_EPS_GRID, ExperimentConfig, config_from_dict, load_config
from .csvio import emit_csv, read_slopes, read_sweep
from .experiments import (
    SlopeFit,
    SweepRow,
    ValidationReport,
    fit_slopes,
    mc_validate,
    model_errors,
    sweep_epsilon,
)
