"""Roundabout digital-twin co-simulator (Python bindings)."""

import json as _json

from ._rbtwin import (
    ConfigError,
    DomainError,
    World,
    build_y2,
    build_y3,
    compute_y1,
    estimate_tau,
    fidelity_files,
    fidelity_rmse,
    hv_volume,
    n_of,
    n_of_raw,
    n_re,
    normalize_config,
    objective_y,
    quantile,
    r_oc,
    run_scenario,
    run_sweep,
    simulate,
)


def config_json(config=None):
    """Accepts a dict, a JSON string or None and returns JSON text."""
    if config is None:
        return "{}"
    if isinstance(config, str):
        return config
    return _json.dumps(config)


__all__ = [
    "ConfigError",
    "DomainError",
    "World",
    "build_y2",
    "build_y3",
    "compute_y1",
    "config_json",
    "estimate_tau",
    "fidelity_files",
    "fidelity_rmse",
    "hv_volume",
    "n_of",
    "n_of_raw",
    "n_re",
    "normalize_config",
    "objective_y",
    "quantile",
    "r_oc",
    "run_scenario",
    "run_sweep",
    "simulate",
]
