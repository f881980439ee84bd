"""Domain errors raised by the toolkit services.

Routes translate these into HTTP errors and the CLI into exit status 2.
"""
from typing import Any, Dict, Optional, Sequence


class DecoderToolkitError(Exception):
    """Base class for every error raised by the toolkit."""


class ParameterError(DecoderToolkitError, ValueError):
    """Out-of-range or inconsistent input parameters."""


class DimensionError(DecoderToolkitError, ValueError):
    """Operands of mismatched length or shape."""


class CapacityError(DecoderToolkitError):
    """An exhaustive search would exceed its configured bound."""


class ScheduleConflictError(DecoderToolkitError):
    """Two gates of a syndrome-extraction plan touch one qubit in one slot."""


class CodeConstructionError(DecoderToolkitError):
    """A constructed stabilizer code violates a commutation invariant."""


class UndetectableLogicalError(DecoderToolkitError):
    """A single noise outcome flips an observable without flipping any detector."""

    def __init__(self, message: str, observables: Sequence[int] = ()):
        super().__init__(message)
        self.observables = tuple(observables)


class DecompositionError(DecoderToolkitError):
    """A hyperedge mechanism has no decomposition into existing graphlike mechanisms."""

    def __init__(self, message: str, detectors: Sequence[int] = (), observables: Sequence[int] = ()):
        super().__init__(message)
        self.detectors = tuple(detectors)
        self.observables = tuple(observables)


class DemParseError(DecoderToolkitError):
    """Malformed detector-error-model text."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class InfeasibleSyndromeError(DecoderToolkitError):
    """A defect can reach neither another defect nor the boundary."""


class CorrectionMismatchError(DecoderToolkitError):
    """A decoder returned a correction whose syndrome differs from the input."""


class FitDomainError(DecoderToolkitError):
    """The data do not support the requested fit (e.g. no crossing in range)."""


class FitError(DecoderToolkitError):
    """A nonlinear fit failed to converge."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class OverheadRangeError(DecoderToolkitError):
    """The target logical error rate is unreachable below the distance cap."""


class UndefinedRatioError(DecoderToolkitError):
    """A ratio of failure rates has a zero-failure denominator."""

    def __init__(self, message: str, numerator_failures: int, denominator_failures: int):
        super().__init__(message)
        self.numerator_failures = numerator_failures
        self.denominator_failures = denominator_failures
