"""Gaussian kernel density estimate scored as a negative log-density.

One scalar bandwidth h is shared by all dimensions. The default follows
Scott's rule, h = n^(-1/(d+4)) * (mean per-dimension std), and the score is

    -log f(q) = -logsumexp_i(-||q - x_i||^2 / (2 h^2))
                + log n + d*log h + (d/2)*log(2*pi),

evaluated in log space throughout, so scores stay finite even where the
density underflows. In very high dimension the d*log h term dominates and
the estimate degenerates toward a distance ranking; that is a property of
the method, not of this implementation.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import logsumexp

from ..errors import FitError
from .base import FittedDetector, register
from .config import DetectorConfig


def scott_bandwidth(train: np.ndarray) -> float:
    """n^(-1/(d+4)) times the mean per-dimension standard deviation."""
    n, d = train.shape
    return float(n ** (-1.0 / (d + 4)) * train.std(axis=0).mean())


class KdeDetector(FittedDetector):
    kind = "kde"

    def __init__(self, train: np.ndarray, bandwidth: float):
        super().__init__(train.shape[1])
        self._train = train
        self.bandwidth = bandwidth
        n, d = train.shape
        # additive constant: log n + d log h + (d/2) log 2*pi
        self._log_norm = math.log(n) + d * math.log(bandwidth) + 0.5 * d * math.log(2 * math.pi)

    def _score(self, queries: np.ndarray) -> np.ndarray:
        d2 = cdist(queries, self._train, "sqeuclidean")
        return -logsumexp(-d2 / (2.0 * self.bandwidth**2), axis=1) + self._log_norm


@register("kde")
def fit_kde(config: DetectorConfig, train: np.ndarray) -> KdeDetector:
    bw = config.params["bandwidth"]
    if bw == "scott":
        bw = scott_bandwidth(train)
    if not bw > 0:
        raise FitError(
            "bandwidth must be positive; training data has zero variance in "
            "every dimension, pass an explicit bandwidth instead"
        )
    return KdeDetector(train, float(bw))
