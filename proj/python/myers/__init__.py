"""Probabilistic Myers criterion on closed surfaces."""

import json

from ._core import (
    ConfigError,
    Manifold,
    MyersError,
    Point,
    sample_ensemble,
    spectrum,
    top_eigen,
    validate,
)
from ._core import check_config_json as _check_config_json
from ._core import check_json as _check_json

__all__ = [
    "ConfigError",
    "Manifold",
    "MyersError",
    "Point",
    "check",
    "check_config",
    "sample_ensemble",
    "spectrum",
    "top_eigen",
    "validate",
]


def check(manifold, h="0", **numerics):
    """Full criterion report as a dict (same content as `myers check`)."""
    return json.loads(_check_json(manifold, h, **numerics))


def check_config(config, threads=1):
    """Report for a run configuration given as a dict or JSON text."""
    text = config if isinstance(config, str) else json.dumps(config)
    return json.loads(_check_config_json(text, threads))
