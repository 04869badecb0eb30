"""Core value types: corpora records, embedding sets, splits, and matrices.

Everything here is immutable after construction (arrays are marked
read-only), so instances are safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TextRecord:
    """One raw text sample with its source-dataset class id."""

    id: str
    text: str
    class_id: int

    def __post_init__(self):
        if not self.text:
            raise ValueError(f"record {self.id!r}: text must be non-empty")


def validate_corpus(records: Sequence[TextRecord]) -> None:
    """Check the corpus-level invariant: record ids are unique.

    Raises:
        ValueError: if any id occurs more than once.
    """
    seen: set[str] = set()
    for rec in records:
        if rec.id in seen:
            raise ValueError(f"duplicate record id {rec.id!r}")
        seen.add(rec.id)


@dataclass(frozen=True)
class LabeledEmbeddingSet:
    """An n×d matrix of sentence embeddings with optional binary labels.

    The matrix is stored as float32 (the on-disk dtype), labels as uint8
    where 0 = normal and 1 = anomaly. ``labels`` may be None for unlabeled
    (e.g. freshly fetched) sets.
    """

    name: str
    embedding_source: str
    matrix: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        matrix = np.ascontiguousarray(self.matrix, dtype=np.float32)
        if matrix.ndim != 2:
            raise ValueError(f"matrix must be 2-D, got shape {matrix.shape}")
        if matrix.shape[1] == 0:
            raise ValueError("embedding dimension must be positive")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("matrix contains non-finite values")
        object.__setattr__(self, "matrix", _freeze(matrix))

        if self.labels is not None:
            labels = np.ascontiguousarray(self.labels, dtype=np.uint8)
            if labels.shape != (matrix.shape[0],):
                raise ValueError(
                    f"labels shape {labels.shape} does not match n={matrix.shape[0]}"
                )
            if labels.size and labels.max() > 1:
                raise ValueError("labels must be binary (0 or 1)")
            object.__setattr__(self, "labels", _freeze(labels))

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def without_labels(self) -> "LabeledEmbeddingSet":
        return LabeledEmbeddingSet(self.name, self.embedding_source, self.matrix, None)


@dataclass(frozen=True)
class BenchmarkSplit:
    """A train/test pair for one dataset under one embedding source.

    Train labels must be absent or all-normal; test labels are required and
    ``anomaly_ratio`` must equal their mean.
    """

    train: LabeledEmbeddingSet
    test: LabeledEmbeddingSet
    anomaly_ratio: float

    def __post_init__(self):
        if self.train.dim != self.test.dim:
            raise ValueError(
                f"train dim {self.train.dim} != test dim {self.test.dim}"
            )
        if self.train.labels is not None and np.any(self.train.labels != 0):
            raise ValueError("train labels must be absent or all-normal")
        if self.test.labels is None:
            raise ValueError("test set must be labeled")
        ratio = float(np.mean(self.test.labels))
        if not 0.0 < self.anomaly_ratio < 1.0:
            raise ValueError(f"anomaly_ratio {self.anomaly_ratio} not in (0,1)")
        if abs(ratio - self.anomaly_ratio) > 1e-9:
            raise ValueError(
                f"anomaly_ratio {self.anomaly_ratio} != test label mean {ratio}"
            )

    @classmethod
    def of(cls, train: LabeledEmbeddingSet, test: LabeledEmbeddingSet) -> "BenchmarkSplit":
        """Build a split with the ratio computed from the test labels."""
        if test.labels is None:
            raise ValueError("test set must be labeled")
        return cls(train, test, float(np.mean(test.labels)))

    @property
    def name(self) -> str:
        """Dataset identity; by convention the train set's name."""
        return self.train.name


@dataclass(frozen=True)
class PerformanceMatrix:
    """An m×n grid of metric values in percent, rows = embedding/pooling
    combos, columns = detectors.

    Cells are floats in [0,100]; NaN marks a missing (unmeasured or failed)
    cell so partially observed matrices can flow into completion.
    """

    dataset: str
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "row_labels", tuple(self.row_labels))
        object.__setattr__(self, "col_labels", tuple(self.col_labels))
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError(f"values must be 2-D, got shape {values.shape}")
        m, n = values.shape
        if m == 0 or n == 0:
            raise ValueError("matrix must have at least one row and column")
        if len(self.row_labels) != m or len(self.col_labels) != n:
            raise ValueError(
                f"label counts ({len(self.row_labels)},{len(self.col_labels)}) "
                f"do not match shape {values.shape}"
            )
        if len(set(self.row_labels)) != m or len(set(self.col_labels)) != n:
            raise ValueError("row and column labels must be unique")
        present = ~np.isnan(values)
        cells = values[present]
        if np.any(np.isinf(cells)):
            raise ValueError("cells must be finite or NaN")
        if cells.size and (cells.min() < 0.0 or cells.max() > 100.0):
            raise ValueError("cells must lie in [0,100]")
        object.__setattr__(self, "values", _freeze(values))

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def is_complete(self) -> bool:
        return not np.any(np.isnan(self.values))

    def cell(self, row_label: str, col_label: str) -> float:
        return float(
            self.values[self.row_labels.index(row_label), self.col_labels.index(col_label)]
        )
