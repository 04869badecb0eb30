"""Unsupervised detector zoo: fit on normal vectors, score queries.

Every kind follows the same contract: ``fit(config, train)`` returns an
immutable fitted model whose ``score`` maps query vectors to reals where
larger means more anomalous; ``threshold_decision`` turns scores into
binary flags. Available kinds are listed in ``DETECTOR_KINDS``.
"""

from .base import FittedDetector, fit, threshold_decision
from .config import DETECTOR_KINDS, DetectorConfig, default_config

# importing the kind modules registers their builders with base.fit
from . import ae, dsvdd, ecod, iforest, kde, knn, lof, ocsvm, pca  # noqa: F401

__all__ = [
    "DETECTOR_KINDS",
    "DetectorConfig",
    "FittedDetector",
    "default_config",
    "fit",
    "threshold_decision",
]
