"""k-nearest-neighbor distance detector.

The anomaly score of a query is its Euclidean distance to the k-th nearest
training point (k defaults to 3). Queries are treated as external points:
nothing is excluded, so a query equal to a training point has distance 0 as
its first neighbor.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

from ..errors import ConfigError
from .base import FittedDetector, register
from .config import DetectorConfig


class KnnDetector(FittedDetector):
    kind = "knn"

    def __init__(self, train: np.ndarray, k: int):
        super().__init__(train.shape[1])
        self._train = train
        self._k = k

    def _score(self, queries: np.ndarray) -> np.ndarray:
        dist = cdist(queries, self._train)
        if self._k == 1:
            return dist.min(axis=1)
        return np.partition(dist, self._k - 1, axis=1)[:, self._k - 1]


@register("knn")
def fit_knn(config: DetectorConfig, train: np.ndarray) -> KnnDetector:
    k = config.params["k"]
    if train.shape[0] < k:
        raise ConfigError(
            f"knn needs at least k={k} training points, got {train.shape[0]}"
        )
    return KnnDetector(train, k)
