from typing import Optional, Dict, Any, Tuple

import numpy as np


class TmaxModelError(Exception):
    """Base exception for all model, data and sampler errors."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}


class EmptyPanelError(TmaxModelError):
    """Raised when a panel has no years, days or sites."""
    pass


class DataValidationError(TmaxModelError):
    """Raised when panel values or site metadata break their invariants."""
    pass


class IngestError(TmaxModelError):
    """Raised when an input file row cannot be parsed."""

    def __init__(self, message: str, line: Optional[int] = None, details: Optional[Dict[str, Any]] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message, details)
        self.line = line


class FactorizationError(TmaxModelError):
    """Raised when a covariance or correlation matrix is not positive definite."""

    def __init__(self, message: str, pair: Optional[Tuple[str, str]] = None, details: Optional[Dict[str, Any]] = None):
        if pair is not None:
            message = f"{message} (sites {pair[0]!r} and {pair[1]!r})"
        super().__init__(message, details)
        self.pair = pair


class NumericalDegeneracyError(TmaxModelError):
    """Raised when a full conditional has a zero or undefined precision."""
    pass


class NonFiniteStateError(TmaxModelError):
    """Raised when a sweep leaves a non-finite value in the state."""

    def __init__(self, message: str, iteration: Optional[int] = None, details: Optional[Dict[str, Any]] = None):
        if iteration is not None:
            message = f"{message} at iteration {iteration}"
        super().__init__(message, details)
        self.iteration = iteration


class RescaleError(TmaxModelError):
    """Raised when posterior draws are rescaled twice."""
    pass


class InsufficientDrawsError(TmaxModelError):
    """Raised when a chain holds fewer retained draws than a thinning target needs."""

    def __init__(self, message: str, required: Optional[int] = None, details: Optional[Dict[str, Any]] = None):
        if required is not None:
            message = f"{message}; at least {required} draws per chain are required"
        super().__init__(message, details)
        self.required = required


class ConfigurationError(TmaxModelError):
    """Raised when a run configuration or variant string is invalid."""
    pass


class SiteMismatchError(TmaxModelError):
    """Raised when two fits do not cover the same sites."""
    pass


class ScoringError(TmaxModelError):
    """Raised when a held-out site has no observed cell to score."""
    pass


def create_exception_from_linalg(
    error: Exception,
    context: str,
    pair: Optional[Tuple[str, str]] = None,
    **kwargs
) -> TmaxModelError:
    """Create an appropriate exception from a numpy/scipy linear algebra failure."""

    if isinstance(error, TmaxModelError):
        return error

    details = {"context": context, "original": repr(error)}
    details.update(kwargs)

    if isinstance(error, np.linalg.LinAlgError):
        return FactorizationError(f"{context}: matrix is not positive definite", pair=pair, details=details)
    if isinstance(error, (FloatingPointError, ZeroDivisionError)):
        return NumericalDegeneracyError(f"{context}: {error}", details=details)
    return TmaxModelError(f"{context}: {error}", details=details)


def exit_code_for(error: BaseException) -> int:
    """Map an exception onto the command-line exit-code contract."""
    if isinstance(error, ConfigurationError):
        return 2
    return 1
