"""Experiment harness: config loading, sweep runners, CSV output, CLI."""

from .config import ResolvedConfig, load_config, resolve_config
from .csvio import format_cell, write_csv
from .experiments import (
    run_ga_design,
    run_mi_snr,
    run_re_region,
    run_rtfv_experiment,
    run_ssr_eh,
)

__all__ = [
    "ResolvedConfig",
    "load_config",
    "resolve_config",
    "format_cell",
    "write_csv",
    "run_mi_snr",
    "run_re_region",
    "run_ssr_eh",
    "run_rtfv_experiment",
    "run_ga_design",
]
