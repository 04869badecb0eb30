"""Detection-quality metrics, the recovery metric, and ranking statistics.

AUROC uses the rank-statistic formulation (tied pairs count one half);
AUPRC is average precision with tied scores collapsed into one group, so an
all-tied scoring degrades exactly to the positive prevalence. Ranking runs
per row with rank 1 for the largest value and ties averaged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .data.types import PerformanceMatrix
from .errors import MetricError


@dataclass(frozen=True)
class ScoredTestSet:
    """Anomaly scores paired with ground-truth binary labels."""

    scores: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        labels = np.asarray(self.labels)
        if scores.ndim != 1 or labels.shape != scores.shape:
            raise ValueError(
                f"scores {scores.shape} and labels {labels.shape} must be equal-length vectors"
            )
        if not np.all(np.isfinite(scores)):
            raise ValueError("scores contain non-finite values")
        if not np.all((labels == 0) | (labels == 1)):
            raise ValueError("labels must be binary (0 or 1)")
        labels = labels.astype(np.uint8)
        scores.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "labels", labels)


@dataclass(frozen=True)
class RecoveryReport:
    """MAPE report for predicted vs true values on hidden matrix cells."""

    true_values: np.ndarray
    predicted: np.ndarray
    k: int
    missing_rate: float
    mape: float

    def __post_init__(self):
        true_values = np.asarray(self.true_values, dtype=np.float64)
        predicted = np.asarray(self.predicted, dtype=np.float64)
        if true_values.shape != predicted.shape or true_values.ndim != 1:
            raise ValueError("true_values and predicted must be equal-length vectors")
        if self.k != true_values.size:
            raise ValueError(f"k={self.k} does not match {true_values.size} values")
        if self.mape < 0:
            raise ValueError("mape must be non-negative")
        true_values.setflags(write=False)
        predicted.setflags(write=False)
        object.__setattr__(self, "true_values", true_values)
        object.__setattr__(self, "predicted", predicted)

    @classmethod
    def build(
        cls, true_values, predicted, missing_rate: float
    ) -> "RecoveryReport":
        true_values = np.asarray(true_values, dtype=np.float64)
        return cls(
            true_values=true_values,
            predicted=np.asarray(predicted, dtype=np.float64),
            k=true_values.size,
            missing_rate=missing_rate,
            mape=mape(true_values, predicted),
        )


def _split_classes(s: ScoredTestSet) -> tuple[np.ndarray, np.ndarray]:
    pos = s.labels == 1
    if not pos.any() or pos.all():
        raise MetricError("need at least one positive and one negative label")
    return s.scores, pos


def auroc(s: ScoredTestSet) -> float:
    """Probability that a random positive outranks a random negative.

    Tied score pairs count one half, which makes this exactly the
    rank-sum statistic scaled to [0,1].

    Raises:
        MetricError: if only one class is present.
    """
    scores, pos = _split_classes(s)
    n_pos = int(pos.sum())
    n_neg = scores.size - n_pos
    ranks = stats.rankdata(scores, method="average")
    rank_sum = float(ranks[pos].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def auprc(s: ScoredTestSet) -> float:
    """Average precision over the descending-score step curve.

    Samples with equal scores form one group (one curve point), so the
    result never depends on tie-breaking order.

    Raises:
        MetricError: if only one class is present.
    """
    scores, pos = _split_classes(s)
    n_pos = int(pos.sum())

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_pos = pos[order].astype(np.int64)

    # end index (exclusive) of every tied-score group
    boundaries = np.flatnonzero(np.diff(sorted_scores) != 0) + 1
    ends = np.append(boundaries, scores.size)

    cum_tp = np.cumsum(sorted_pos)[ends - 1]
    precision = cum_tp / ends
    recall = cum_tp / n_pos
    delta_recall = np.diff(recall, prepend=0.0)
    return float(np.sum(delta_recall * precision))


def mape(true_values, predicted) -> float:
    """Mean of |true - predicted| / |true|.

    Raises:
        MetricError: on length mismatch or a zero true value.
    """
    true_values = np.asarray(true_values, dtype=np.float64)
    predicted = np.asarray(predicted, dtype=np.float64)
    if true_values.shape != predicted.shape or true_values.ndim != 1:
        raise MetricError("true and predicted must be equal-length vectors")
    if true_values.size == 0:
        raise MetricError("need at least one value")
    if np.any(true_values == 0):
        raise MetricError("true value of 0 makes the percentage error undefined")
    return float(np.mean(np.abs(true_values - predicted) / np.abs(true_values)))


def _ranks_per_row(values: np.ndarray) -> np.ndarray:
    # rank 1 = largest value in the row, ties averaged
    return np.apply_along_axis(lambda r: stats.rankdata(-r, method="average"), 1, values)


def average_ranks(pm: PerformanceMatrix) -> np.ndarray:
    """Per-column mean rank across rows (rank 1 = best/largest, ties averaged).

    The output sums to n(n+1)/2 for n columns.

    Raises:
        MetricError: if the matrix has missing cells.
    """
    if not pm.is_complete:
        raise MetricError("matrix has missing cells; ranks are undefined")
    return _ranks_per_row(pm.values).mean(axis=0)


def studentized_range_sf(q: float, k: int) -> float:
    """Tail probability P(Q >= q) of the studentized range of k groups
    with infinite degrees of freedom."""
    if k < 2:
        raise ValueError("need at least two groups")
    if q <= 0:
        return 1.0
    p = float(stats.studentized_range.sf(q, k, np.inf))
    return min(max(p, 0.0), 1.0)


@dataclass(frozen=True)
class FriedmanNemenyiResult:
    """Friedman test statistic plus the matrix of pairwise Nemenyi p-values.

    ``p_values[i, j]`` compares columns i and j; the matrix is symmetric
    with unit diagonal.
    """

    col_labels: tuple[str, ...]
    mean_ranks: np.ndarray
    friedman_chi2: float
    friedman_p: float
    p_values: np.ndarray


def friedman_nemenyi(pm: PerformanceMatrix) -> FriedmanNemenyiResult:
    """Friedman rank test across columns, then pairwise Nemenyi p-values.

    Rows act as blocks and columns as treatments. The Nemenyi step uses
    the infinite-degrees-of-freedom studentized-range tail.

    Raises:
        MetricError: on missing cells or fewer than 2 rows/columns.
    """
    m, k = pm.m, pm.n
    if m < 2 or k < 2:
        raise MetricError("need at least 2 rows and 2 columns")
    mean_ranks = average_ranks(pm)

    chi2 = 12.0 * m / (k * (k + 1)) * (
        float(np.sum(mean_ranks**2)) - k * (k + 1) ** 2 / 4.0
    )
    chi2 = max(chi2, 0.0)
    friedman_p = float(stats.chi2.sf(chi2, k - 1)) if chi2 > 0 else 1.0

    se = np.sqrt(k * (k + 1) / (12.0 * m))
    p_values = np.ones((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            q = abs(mean_ranks[i] - mean_ranks[j]) / se
            p = studentized_range_sf(q, k)
            p_values[i, j] = p_values[j, i] = p

    return FriedmanNemenyiResult(
        col_labels=pm.col_labels,
        mean_ranks=mean_ranks,
        friedman_chi2=chi2,
        friedman_p=friedman_p,
        p_values=p_values,
    )
