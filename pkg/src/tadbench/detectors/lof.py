"""Local outlier factor with the query treated as an external point.

Fitting precomputes, for every training point, its k-distance, its
neighborhood (ties included), and its local reachability density over
neighbors excluding the point itself. Scoring never inserts the query into
the training structures: the query's neighborhood is found among training
points only, so training data and scores stay immutable.

Densities are floored at 1e-12 before inversion, which keeps scores finite
when duplicated points collapse reachability to zero.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

from ..errors import ConfigError
from .base import FittedDetector, register
from .config import DetectorConfig

_DENSITY_FLOOR = 1e-12


def _lrd_from_dists(dist_block: np.ndarray, k_dist: np.ndarray, neighbor_lists) -> np.ndarray:
    """Local reachability density for each row of a distance block.

    ``dist_block[i, j]`` is the distance from point i to training point j,
    ``neighbor_lists[i]`` the indices of i's neighborhood.
    """
    out = np.empty(dist_block.shape[0])
    for i, nbrs in enumerate(neighbor_lists):
        reach = np.maximum(k_dist[nbrs], dist_block[i, nbrs])
        out[i] = 1.0 / max(reach.mean(), _DENSITY_FLOOR)
    return out


class LofDetector(FittedDetector):
    kind = "lof"

    def __init__(self, train: np.ndarray, n_neighbors: int, k_dist: np.ndarray, lrd: np.ndarray):
        super().__init__(train.shape[1])
        self._train = train
        self._k = n_neighbors
        self._k_dist = k_dist
        self._lrd = lrd

    def _score(self, queries: np.ndarray) -> np.ndarray:
        dist = cdist(queries, self._train)
        # k-distance of each query among training points, ties included
        kth = np.partition(dist, self._k - 1, axis=1)[:, self._k - 1]
        neighbor_lists = [np.flatnonzero(dist[i] <= kth[i]) for i in range(dist.shape[0])]
        lrd_q = _lrd_from_dists(dist, self._k_dist, neighbor_lists)
        scores = np.empty(dist.shape[0])
        for i, nbrs in enumerate(neighbor_lists):
            scores[i] = self._lrd[nbrs].mean() / lrd_q[i]
        return scores


@register("lof")
def fit_lof(config: DetectorConfig, train: np.ndarray) -> LofDetector:
    k = config.params["n_neighbors"]
    n = train.shape[0]
    if n <= k:
        raise ConfigError(
            f"lof needs more than n_neighbors={k} training points, got {n}"
        )
    dist = cdist(train, train)
    np.fill_diagonal(dist, np.inf)
    k_dist = np.partition(dist, k - 1, axis=1)[:, k - 1]
    neighbor_lists = [np.flatnonzero(dist[i] <= k_dist[i]) for i in range(n)]
    lrd = _lrd_from_dists(dist, k_dist, neighbor_lists)
    return LofDetector(train, k, k_dist, lrd)
