"""Exception types shared across the package."""

from __future__ import annotations


class TrochoidError(Exception):
    """Base class for all errors raised by this package."""


class InvalidSpecError(TrochoidError):
    """A generator or law was given parameters that violate its contract."""


class GenerationError(TrochoidError):
    """A random construction could not be completed within its retry budget."""


class ContinuationError(TrochoidError):
    """The boundary continuation stalled; carries the last angle that solved."""

    def __init__(self, message: str, last_good_phi: float):
        super().__init__(message)
        self.last_good_phi = last_good_phi


class EigensolverError(TrochoidError):
    """The dense eigensolver failed to converge."""


class CalibrationError(TrochoidError):
    """A requested correlation strength is outside the achievable range."""

    def __init__(self, message: str, achievable: tuple[float, float]):
        super().__init__(message)
        self.achievable = achievable


class OutsideSupportError(TrochoidError):
    """Signal that a query point has no interior fixed-point branch."""


class ConfigError(TrochoidError):
    """A CLI/config input failed validation (exit code 2)."""
