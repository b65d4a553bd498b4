"""Exception hierarchy.

Every error raised by the library derives from :class:`AlgebraError`.  Errors
that concern a particular chart, overlap or triple carry it in ``location`` so
the harness can report where a scenario went wrong.
"""

from __future__ import annotations


class AlgebraError(Exception):
    """Base class for all library errors."""

    def __init__(self, message: str, location=None):
        super().__init__(message)
        self.location = location

    def __str__(self) -> str:
        msg = super().__str__()
        if self.location is not None:
            return f"{msg} (at {self.location})"
        return msg


class NotDivisible(AlgebraError):
    pass


class NotAUnit(AlgebraError):
    pass


class LogViolation(AlgebraError):
    pass


class NotLiftPair(AlgebraError):
    pass


class NotNilpotent(AlgebraError):
    pass


class NotCommuting(AlgebraError):
    pass


class ExponentTooLarge(AlgebraError):
    pass


class FactorialNotInvertible(AlgebraError):
    pass


class NotNilpotentEnough(AlgebraError):
    pass


class CocycleFailure(AlgebraError):
    pass


class HiggsMismatch(AlgebraError):
    pass


class ShapeMismatch(AlgebraError):
    pass


class NotAFrobeniusLift(AlgebraError):
    pass


class LogShapeViolation(AlgebraError):
    pass


class ScenarioError(AlgebraError):
    """Malformed or inconsistent scenario input."""
