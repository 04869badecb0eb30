"""Principal-component reconstruction error.

Fitting centers the training data and keeps the smallest number of leading
principal directions whose explained variance reaches the configured
threshold (default 90%), capped at min(n-1, d, max_components). The score
of a query x is the squared residual outside the kept subspace,

    ||x - c||^2 - ||B^T (x - c)||^2,

where c is the training mean and B the orthonormal basis.
"""

from __future__ import annotations

import numpy as np

from ..errors import FitError
from .base import FittedDetector, register
from .config import DetectorConfig


class PcaDetector(FittedDetector):
    kind = "pca"

    def __init__(self, center: np.ndarray, basis: np.ndarray):
        super().__init__(center.shape[0])
        self.center = center
        self.basis = basis  # (d, k), orthonormal columns

    @property
    def n_components(self) -> int:
        return self.basis.shape[1]

    def _score(self, queries: np.ndarray) -> np.ndarray:
        z = queries - self.center
        total = np.einsum("ij,ij->i", z, z)
        proj = z @ self.basis
        captured = np.einsum("ij,ij->i", proj, proj)
        return total - captured


@register("pca")
def fit_pca(config: DetectorConfig, train: np.ndarray) -> PcaDetector:
    n, d = train.shape
    center = train.mean(axis=0)
    centered = train - center
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    power = svals**2
    total = power.sum()
    if total <= 0:
        raise FitError("pca basis is degenerate: training data has zero variance")
    k = int(np.searchsorted(np.cumsum(power) / total, config.params["variance_threshold"]) + 1)
    k = min(k, n - 1 if n > 1 else 1, d, config.params["max_components"])
    return PcaDetector(center, vt[:k].T.copy())
