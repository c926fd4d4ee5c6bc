"""Exception hierarchy shared by all modules.

Each class carries the CLI exit code it maps to, so the command layer can
translate failures without string matching.
"""

from __future__ import annotations


class KundtflowError(Exception):
    exit_code = 1


class ConfigError(KundtflowError):
    exit_code = 2


class NotIntegrableError(KundtflowError):
    """A shape operator violates the algebraic integrability relations."""

    exit_code = 3

    def __init__(self, relation: str, residual: float):
        super().__init__(f"not integrable: {relation} (residual {residual:.3e})")
        self.relation = relation
        self.residual = residual


class IntervalExceededError(KundtflowError):
    """A closed form was evaluated at or beyond a tan-type singularity."""

    exit_code = 4


class DegenerateMetricError(KundtflowError):
    exit_code = 5

    def __init__(self, message: str, points=None):
        super().__init__(message)
        self.points = points


class PreconditionError(KundtflowError):
    """Algebraic preconditions on fields (null, unit, orthogonal) are violated."""

    exit_code = 1
