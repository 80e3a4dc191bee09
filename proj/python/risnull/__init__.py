"""Python access to the risnull core.

Sweep and solve entry points take a plain dict with the same keys as the
CLI config file and return parsed JSON.
"""

import json as _json

from ._risnull import (
    ConfigError,
    NumericalError,
    antenna_collab_feasible,
    derive_trial_seed,
    gordon_bounds_sphere,
    gordon_bounds_torus,
    n1,
    n2,
    necessary_n_gordon,
    project_torus,
    refined_threshold,
    round_half_up,
    solve_system,
    sufficient_n,
    surrogate_system,
    threshold_report,
    transition_eta,
    validate_theorem3,
    validate_theorem4,
)
from . import _risnull

__all__ = [
    "ConfigError",
    "NumericalError",
    "antenna_collab_feasible",
    "derive_trial_seed",
    "feasibility_sweep",
    "gordon_bounds_sphere",
    "gordon_bounds_torus",
    "n1",
    "n2",
    "necessary_n_gordon",
    "project_torus",
    "quantile_boundary",
    "rate_sweep",
    "refined_threshold",
    "round_half_up",
    "solve_instance",
    "solve_system",
    "sufficient_n",
    "surrogate_system",
    "threshold_report",
    "transition_eta",
    "validate_theorem3",
    "validate_theorem4",
]


def solve_instance(config=None):
    return _risnull.solve_instance(_json.dumps(config or {}))


def feasibility_sweep(config=None, workers=1):
    return _json.loads(_risnull.feasibility_sweep(_json.dumps(config or {}), workers))


def quantile_boundary(result, p):
    """[(eta, N or None), ...] for a result returned by feasibility_sweep."""
    return _risnull.quantile_boundary(_json.dumps(result), p)


def rate_sweep(config=None, trials=20, workers=1):
    return _json.loads(_risnull.rate_sweep(_json.dumps(config or {}), trials, workers))["rows"]
