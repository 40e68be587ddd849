"""Gauge-invariant pricing, discounting and risk-free portfolio toolkit."""

import json

from ._core import *  # noqa: F401,F403
from ._core import (
    ComputationError,
    GaugeError,
    ValidationError,
    __version__,
    _run_json,
)


def run(command, config=None, panel=None, canonical=True, normalize=False):
    """Run a subcommand and return (exit_code, document) with the document decoded."""
    code, text = _run_json(command, json.dumps(config or {}), panel, canonical, normalize)
    return code, json.loads(text)
