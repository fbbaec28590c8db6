"""Moving balls, ESQM and Sl1QP on small polynomial programs."""

import csv
import io
import json

from ._core import (
    ConfigError,
    ParseError,
    Polynomial,
    SimpleSet,
    builtin_methods,
    builtin_names,
    contains,
    estimate_rate,
    list_problems,
    parse_polynomial,
    project,
    stationarity_residual,
)
from . import _core

__all__ = [
    "ConfigError",
    "ParseError",
    "Polynomial",
    "SimpleSet",
    "builtin_methods",
    "builtin_names",
    "contains",
    "estimate_rate",
    "list_problems",
    "parse_polynomial",
    "project",
    "run_builtin",
    "run_config",
    "stationarity_residual",
]


def _result(pair):
    summary_text, trace_text = pair
    summary = json.loads(summary_text)
    rows = list(csv.DictReader(io.StringIO(trace_text)))
    summary["trace"] = [{k: float(v) for k, v in row.items()} for row in rows]
    return summary


def run_builtin(name, method):
    """Runs a builtin problem; returns the summary dict with a `trace` list."""
    return _result(_core._run_builtin(name, method))


def run_config(text):
    """Runs a `key = value` config given as text."""
    return _result(_core._run_config(text))
