"""Analytical model and simulator for multi-packet transmission random access."""

from ._mptmac import (
    ConfigError,
    ModelError,
    attempt_size_distribution,
    default_config,
    expected_cf_attempts,
    per,
    per_table,
    replicate,
    run_experiment_csv,
    simulate,
    snr_db_to_linear,
    solve,
    sweep,
    timing,
    validate_config,
)

__all__ = [
    "ConfigError",
    "ModelError",
    "attempt_size_distribution",
    "default_config",
    "expected_cf_attempts",
    "per",
    "per_table",
    "replicate",
    "run_experiment_csv",
    "simulate",
    "snr_db_to_linear",
    "solve",
    "sweep",
    "timing",
    "validate_config",
]

__version__ = "0.1.0"
