"""Rate-distortion functions of sampled wide-sense cyclostationary Gaussian sources."""

import json as _json

from . import _core
from ._core import (
    ConfigError,
    DomainError,
    Error,
    NumericalError,
    PrecisionError,
    ResourceError,
    finite_block_rdf,
    moment_bound_check,
    rational_approx,
    sdd_min_eig_bound,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "Error",
    "NumericalError",
    "PrecisionError",
    "ResourceError",
    "config_schema",
    "finite_block_rdf",
    "gate",
    "moment_bound_check",
    "rational_approx",
    "rdf",
    "sdd_min_eig_bound",
    "sweep",
    "verify",
]


def _dump(config):
    return config if isinstance(config, str) else _json.dumps(config)


def rdf(config, jobs=1):
    """One rate evaluation per configured model. Returns a list of dicts."""
    return _json.loads(_core._rdf(_dump(config), jobs))


def sweep(config, jobs=1):
    """Runs the configured sweep. Failed points carry R=None and an error string."""
    return _json.loads(_core._sweep(_dump(config), jobs))


def gate(config):
    """Margin-condition check per model."""
    return _json.loads(_core._gate(_dump(config)))


def verify(config, jobs=1):
    """Verification suite report as a dict."""
    return _json.loads(_core._verify(_dump(config), jobs))


def config_schema():
    return _json.loads(_core._schema())
