"""Killing spinorial flows on three-dimensional Lie groups, their Lorentzian
lifts and the verification of standard conformally Brinkmann (Kundt) metrics."""

from __future__ import annotations

from . import cauchy, flow, geomkit, kundt, spacetime, specfun
from .errors import (
    ConfigError,
    DegenerateMetricError,
    IntervalExceededError,
    KundtflowError,
    NotIntegrableError,
    PreconditionError,
)

__version__ = "0.1.0"

__all__ = [
    "cauchy",
    "flow",
    "geomkit",
    "kundt",
    "spacetime",
    "specfun",
    "ConfigError",
    "DegenerateMetricError",
    "IntervalExceededError",
    "KundtflowError",
    "NotIntegrableError",
    "PreconditionError",
]
