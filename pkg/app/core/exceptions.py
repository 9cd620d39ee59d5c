"""
Exception hierarchy for the ageing-orderings toolkit.

Input errors (bad parameters, data, domains or levels) are raised before any
numerical work starts; numeric errors signal that quadrature, inversion or
shape testing could not meet its tolerances.
"""


class AgeingOrderError(Exception):
    """Base class for all toolkit errors."""


class ParameterError(AgeingOrderError, ValueError):
    """Raised when a distribution family receives an invalid parameter."""


class SpecParseError(ParameterError):
    """Raised when a distribution spec string cannot be parsed."""


class DataError(AgeingOrderError, ValueError):
    """Raised when a lifetime sample or data file is empty or invalid."""


class DomainError(AgeingOrderError, ValueError):
    """Raised when an argument lies outside the domain of an operation."""


class LevelError(AgeingOrderError, IndexError):
    """Raised when a chain level outside the built range is requested."""


class NumericError(AgeingOrderError, ArithmeticError):
    """Raised when a numerical procedure fails to meet its tolerance."""


class TailError(NumericError):
    """Raised when evaluating below the tail survival cut."""


class GridError(NumericError):
    """Raised when a sampled function has too few points for a shape test."""


INPUT_ERRORS = (ParameterError, DataError, DomainError, LevelError)
"""Errors that map to CLI exit code 2."""
