"""Data layer: label rules, file formats, and shipped fixtures."""

from .fixtures import (
    DATASETS,
    DETECTOR_COLUMNS,
    EMBEDDING_DIMENSIONS,
    EMBEDDING_ROW_LABELS,
    EXTERNAL_COLUMNS,
    FIXTURE_NAMES,
    DatasetInfo,
    available_fixtures,
    load_all_fixtures,
    load_fixture,
)
from .labels import assign_anomaly_labels
from .perfcsv import load_performance_matrix, save_performance_matrix
from .tadb import load_embedding_file, save_embedding_file
from .types import (
    BenchmarkSplit,
    LabeledEmbeddingSet,
    PerformanceMatrix,
    TextRecord,
    validate_corpus,
)

__all__ = [
    "DATASETS",
    "DETECTOR_COLUMNS",
    "EMBEDDING_DIMENSIONS",
    "EMBEDDING_ROW_LABELS",
    "EXTERNAL_COLUMNS",
    "FIXTURE_NAMES",
    "BenchmarkSplit",
    "DatasetInfo",
    "LabeledEmbeddingSet",
    "PerformanceMatrix",
    "TextRecord",
    "assign_anomaly_labels",
    "available_fixtures",
    "load_all_fixtures",
    "load_embedding_file",
    "load_fixture",
    "load_performance_matrix",
    "save_embedding_file",
    "save_performance_matrix",
    "validate_corpus",
]
