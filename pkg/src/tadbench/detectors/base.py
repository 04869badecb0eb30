"""Common fit/score contract shared by every detector kind.

``fit`` validates the training matrix, optionally standardizes it, and
dispatches to the registered builder for the config's kind. The returned
model is immutable; ``score`` accepts either one query vector (returns a
float) or a query matrix (returns one score per row), and larger scores
always mean more anomalous.
"""

from __future__ import annotations

import abc
from typing import Callable

import numpy as np

from ..errors import ConfigError, DimensionMismatchError
from .config import DetectorConfig

# Per-dimension standard deviations below this are treated as constant
# columns during z-scoring so a constant feature maps to 0, not infinity.
_STD_FLOOR = 1e-12

_REGISTRY: dict[str, Callable[[DetectorConfig, np.ndarray], "FittedDetector"]] = {}


def register(kind: str):
    def wrap(builder):
        _REGISTRY[kind] = builder
        return builder

    return wrap


class FittedDetector(abc.ABC):
    """Frozen learned state plus a pure scoring function."""

    kind: str = ""

    def __init__(self, train_dim: int):
        self.train_dim = int(train_dim)
        self._mean: np.ndarray | None = None
        self._std: np.ndarray | None = None

    def score(self, queries) -> np.ndarray | float:
        q = np.asarray(queries, dtype=np.float64)
        single = q.ndim == 1
        if single:
            q = q[None, :]
        if q.ndim != 2 or q.shape[1] != self.train_dim:
            raise DimensionMismatchError(
                f"query dimension {q.shape[-1] if q.ndim else '?'} does not match "
                f"training dimension {self.train_dim}"
            )
        if not np.all(np.isfinite(q)):
            raise ValueError("queries contain non-finite values")
        if self._mean is not None:
            q = (q - self._mean) / self._std
        out = self._score(q)
        return float(out[0]) if single else out

    @abc.abstractmethod
    def _score(self, queries: np.ndarray) -> np.ndarray:
        """Score a validated, standardized (m, d) query block."""


def fit(config: DetectorConfig, train) -> FittedDetector:
    """Fit a detector of ``config.kind`` on assumed-normal training vectors."""
    if config.kind not in _REGISTRY:
        raise ConfigError(f"no registered detector for kind {config.kind!r}")
    x = np.ascontiguousarray(np.asarray(train, dtype=np.float64))
    if x.ndim != 2:
        raise ValueError(f"training data must be 2-D, got shape {x.shape}")
    if x.shape[0] < 1 or x.shape[1] < 1:
        raise ValueError(f"training data must be non-empty, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("training data contains non-finite values")

    mean = std = None
    if config.standardize:
        mean = x.mean(axis=0)
        std = x.std(axis=0)
        std = np.where(std > _STD_FLOOR, std, 1.0)
        x = (x - mean) / std

    model = _REGISTRY[config.kind](config, x)
    model._mean = mean
    model._std = std
    return model


def threshold_decision(scores, threshold: float) -> np.ndarray:
    """Binary anomaly flags: 1 exactly when score > threshold."""
    s = np.asarray(scores, dtype=np.float64)
    return (s > float(threshold)).astype(np.uint8)
