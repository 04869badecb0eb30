"""Exception types shared across the toolkit.

Most errors double as ValueError/RuntimeError so callers that don't care
about the toolkit-specific taxonomy can still catch them idiomatically.
"""

from __future__ import annotations


class TadbenchError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(TadbenchError, ValueError):
    """Invalid configuration value (empty normal-class set, bad kind, ...)."""


class EmbeddingFormatError(TadbenchError, ValueError):
    """Malformed embedding file. ``offset`` is the byte position at fault."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class MatrixFormatError(TadbenchError, ValueError):
    """Malformed performance-matrix CSV. ``row`` is the 0-based data row."""

    def __init__(self, message: str, row: int | None = None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class DimensionMismatchError(TadbenchError, ValueError):
    """Input dimensionality violates a fitted/declared contract."""


class TransportError(TadbenchError, RuntimeError):
    """HTTP embedding request failed after all retry attempts."""


class MetricError(TadbenchError, ValueError):
    """Metric undefined for the given input (single class, zero truth, ...)."""


class FitError(TadbenchError, RuntimeError):
    """Detector training failed. ``duality_gap`` is set by the OCSVM solver."""

    def __init__(self, message: str, duality_gap: float | None = None):
        if duality_gap is not None:
            message = f"{message} (duality gap {duality_gap:.3e})"
        super().__init__(message)
        self.duality_gap = duality_gap


class SpectrumError(TadbenchError, ValueError):
    """Singular spectrum summary undefined (zero matrix)."""


class MaskError(TadbenchError, RuntimeError):
    """Could not build an observation mask satisfying the coverage invariant."""


class CompletionError(TadbenchError, RuntimeError):
    """Matrix completion hit a numeric failure (non-finite objective)."""


class ObservedCellError(TadbenchError, ValueError):
    """A prediction was requested for a cell that is already observed."""


class AggregationError(TadbenchError, ValueError):
    """Row/column label sets disagree across matrices being combined."""


class CollapseWarning(UserWarning):
    """Deep one-class training reached the trivial constant solution."""
