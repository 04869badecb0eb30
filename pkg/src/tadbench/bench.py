"""Grid orchestration: detectors x embedding sets, seeded repeats, summaries.

A grid takes benchmark splits (several embedding sources of the same
dataset become rows of that dataset's matrix) and detector configs
(columns). Every cell is fit/score/metric repeated ``repeats`` times; the
cell value is the mean over repeats, expressed in percent. Per-cell seeds
are derived by hashing (base seed, dataset, config hash, repeat index), so
neither execution order nor parallelism can change any result. A failing
cell records its error and leaves a missing value; the grid always runs to
completion.

Persisted form: one ``results/<dataset>.csv`` per dataset plus
``results/meta.json``. Durations stay in memory only, which keeps repeated
runs byte-identical on disk.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .data.perfcsv import save_performance_matrix
from .data.types import BenchmarkSplit, LabeledEmbeddingSet, PerformanceMatrix
from .detectors import DetectorConfig, fit
from .errors import AggregationError, ConfigError, MetricError
from .metrics import ScoredTestSet, auprc, auroc

_METRICS = {"auroc": auroc, "auprc": auprc}

_SEED_DOMAIN = "v1"


def derive_cell_seed(base_seed: int, dataset: str, config_hash: str, repeat: int) -> int:
    """Stable 64-bit seed for one (dataset, detector, repeat) cell."""
    text = f"{_SEED_DOMAIN}|{base_seed}|{dataset}|{config_hash}|{repeat}"
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def _column_labels(configs: Sequence[DetectorConfig]) -> tuple[str, ...]:
    kinds = [c.kind for c in configs]
    labels = []
    for i, kind in enumerate(kinds):
        labels.append(kind if kinds.count(kind) == 1 else f"{kind}-{i}")
    return tuple(labels)


@dataclass(frozen=True)
class GridSpec:
    """What to run: splits (rows, grouped by dataset) x configs (columns)."""

    splits: tuple[BenchmarkSplit, ...]
    detector_configs: tuple[DetectorConfig, ...]
    repeats: int = 5
    base_seed: int = 0
    metric: str = "auroc"

    def __post_init__(self):
        object.__setattr__(self, "splits", tuple(self.splits))
        object.__setattr__(self, "detector_configs", tuple(self.detector_configs))
        if not self.splits:
            raise ConfigError("grid needs at least one split")
        if not self.detector_configs:
            raise ConfigError("grid needs at least one detector config")
        if self.repeats < 1:
            raise ConfigError(f"repeats must be >= 1, got {self.repeats}")
        if self.metric not in _METRICS:
            raise ConfigError(
                f"unknown metric {self.metric!r}; expected one of {sorted(_METRICS)}"
            )
        seen = set()
        for s in self.splits:
            key = (s.name, s.train.embedding_source)
            if key in seen:
                raise ConfigError(
                    f"duplicate split for dataset {key[0]!r} and embedding {key[1]!r}"
                )
            seen.add(key)


@dataclass(frozen=True)
class CellFailure:
    dataset: str
    row_label: str
    col_label: str
    repeat_index: int
    message: str


@dataclass(frozen=True)
class GridResult:
    """Means, raw repeat values, failures, and replay metadata for one run."""

    matrices: Mapping[str, PerformanceMatrix]
    repeat_values: Mapping[str, np.ndarray]  # (rows, cols, repeats), NaN on failure
    failures: tuple[CellFailure, ...]
    column_labels: tuple[str, ...]
    config_docs: tuple[dict, ...]
    config_hashes: tuple[str, ...]
    metric: str
    base_seed: int
    repeats: int
    durations: Mapping[str, float] = field(default_factory=dict, compare=False)

    def save(self, out_dir) -> list[Path]:
        """Write per-dataset CSVs and meta.json; returns written paths."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for name in sorted(self.matrices):
            path = out / f"{name}.csv"
            save_performance_matrix(self.matrices[name], path)
            written.append(path)
        written.append(self.save_meta(out / "meta.json"))
        return written

    def save_meta(self, path) -> Path:
        """Write only the replay-metadata JSON (configs, seeds, failures)."""
        meta = {
            "metric": self.metric,
            "base_seed": self.base_seed,
            "repeats": self.repeats,
            "columns": [
                {"label": label, "config": doc, "hash": digest}
                for label, doc, digest in zip(
                    self.column_labels, self.config_docs, self.config_hashes
                )
            ],
            "datasets": {
                name: {"rows": list(pm.row_labels)}
                for name, pm in sorted(self.matrices.items())
            },
            "failures": [
                {
                    "dataset": f.dataset,
                    "row": f.row_label,
                    "column": f.col_label,
                    "repeat": f.repeat_index,
                    "message": f.message,
                }
                for f in self.failures
            ],
        }
        meta_path = Path(path)
        meta_path.write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
        return meta_path


def _run_cell(split: BenchmarkSplit, config: DetectorConfig, config_hash: str,
              repeats: int, base_seed: int, metric_fn) -> tuple[np.ndarray, list[str]]:
    """All repeats of one cell; returns (percent values, error messages)."""
    values = np.full(repeats, np.nan)
    errors: list[str] = []
    for rep in range(repeats):
        seed = derive_cell_seed(base_seed, split.name, config_hash, rep)
        try:
            model = fit(config.with_seed(seed), split.train.matrix)
            scores = model.score(split.test.matrix)
            tested = ScoredTestSet(scores, split.test.labels)
            values[rep] = 100.0 * metric_fn(tested)
        except Exception as exc:  # noqa: BLE001 - cell isolation is the contract
            errors.append(f"repeat {rep}: {exc}")
    return values, errors


def run_grid(spec: GridSpec, max_workers: int = 1) -> GridResult:
    """Execute the grid; failures mark cells missing instead of aborting."""
    labels = _column_labels(spec.detector_configs)
    hashes = tuple(c.config_hash() for c in spec.detector_configs)
    metric_fn = _METRICS[spec.metric]

    # preserve first-appearance order of datasets and of rows within each
    by_dataset: dict[str, list[BenchmarkSplit]] = {}
    for split in spec.splits:
        by_dataset.setdefault(split.name, []).append(split)

    jobs = []
    for name, group in by_dataset.items():
        for i, split in enumerate(group):
            for j, config in enumerate(spec.detector_configs):
                jobs.append((name, i, j, split, config, hashes[j]))

    def work(job):
        name, i, j, split, config, config_hash = job
        t0 = time.perf_counter()
        values, errors = _run_cell(
            split, config, config_hash, spec.repeats, spec.base_seed, metric_fn
        )
        return name, i, j, values, errors, time.perf_counter() - t0

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            outcomes = list(pool.map(work, jobs))
    else:
        outcomes = [work(job) for job in jobs]

    repeat_values: dict[str, np.ndarray] = {
        name: np.full((len(group), len(labels), spec.repeats), np.nan)
        for name, group in by_dataset.items()
    }
    failures: list[CellFailure] = []
    durations: dict[str, float] = {}
    for name, i, j, values, errors, dt in outcomes:
        repeat_values[name][i, j] = values
        row_label = by_dataset[name][i].train.embedding_source
        durations[f"{name}/{row_label}/{labels[j]}"] = dt
        for message in errors:
            failures.append(CellFailure(name, row_label, labels[j], len(failures), message))

    matrices = {}
    for name, group in by_dataset.items():
        cube = repeat_values[name]
        means = np.where(
            np.isnan(cube).any(axis=2), np.nan, cube.mean(axis=2)
        )
        matrices[name] = PerformanceMatrix(
            dataset=name,
            row_labels=tuple(s.train.embedding_source for s in group),
            col_labels=labels,
            values=means,
        )

    return GridResult(
        matrices=matrices,
        repeat_values=repeat_values,
        failures=tuple(failures),
        column_labels=labels,
        config_docs=tuple(c.to_dict() for c in spec.detector_configs),
        config_hashes=hashes,
        metric=spec.metric,
        base_seed=spec.base_seed,
        repeats=spec.repeats,
        durations=durations,
    )


def aggregate_rows(results: Sequence[PerformanceMatrix]) -> PerformanceMatrix:
    """Element-wise mean across datasets sharing identical labels."""
    if not results:
        raise AggregationError("nothing to aggregate")
    first = results[0]
    for pm in results[1:]:
        if pm.row_labels != first.row_labels or pm.col_labels != first.col_labels:
            raise AggregationError(
                f"label sets of {pm.dataset!r} do not match {first.dataset!r}"
            )
    stacked = np.stack([pm.values for pm in results])
    return PerformanceMatrix(
        dataset="aggregate",
        row_labels=first.row_labels,
        col_labels=first.col_labels,
        values=stacked.mean(axis=0),
    )


def best_and_mean_per_detector(pm: PerformanceMatrix) -> dict[str, tuple[float, float]]:
    """Per column: (max over rows, mean over rows). Needs a complete matrix."""
    if not pm.is_complete:
        raise MetricError(f"matrix {pm.dataset!r} has missing cells")
    return {
        label: (float(pm.values[:, j].max()), float(pm.values[:, j].mean()))
        for j, label in enumerate(pm.col_labels)
    }


def summary_over_datasets(
    results: Sequence[PerformanceMatrix],
) -> tuple[PerformanceMatrix, PerformanceMatrix]:
    """Condense matrices into (best, mean) per detector, one row per dataset.

    Row labels of the outputs are the input dataset names; columns must
    agree across inputs. Each input must be complete.
    """
    if not results:
        raise AggregationError("nothing to summarize")
    cols = results[0].col_labels
    for pm in results[1:]:
        if pm.col_labels != cols:
            raise AggregationError(
                f"column labels of {pm.dataset!r} do not match {results[0].dataset!r}"
            )
    names = tuple(pm.dataset for pm in results)
    if len(set(names)) != len(names):
        raise AggregationError(f"duplicate dataset names in {names}")
    per_pm = [best_and_mean_per_detector(pm) for pm in results]
    best = np.array([[bm[c][0] for c in cols] for bm in per_pm])
    mean = np.array([[bm[c][1] for c in cols] for bm in per_pm])
    return (
        PerformanceMatrix("best-over-embeddings", names, cols, best),
        PerformanceMatrix("mean-over-embeddings", names, cols, mean),
    )


def two_gaussian_split(seed: int, n_train: int = 1000, n_test_normal: int = 100,
                       n_test_anomaly: int = 100, dim: int = 16, shift: float = 3.0) -> BenchmarkSplit:
    """Synthetic sanity split: normals ~ N(0, I), anomalies ~ N(shift*1, I)."""
    rng = np.random.default_rng(seed)
    train = rng.standard_normal((n_train, dim))
    test = np.vstack([
        rng.standard_normal((n_test_normal, dim)),
        rng.standard_normal((n_test_anomaly, dim)) + shift,
    ])
    labels = np.concatenate([
        np.zeros(n_test_normal, dtype=np.uint8),
        np.ones(n_test_anomaly, dtype=np.uint8),
    ])
    source = f"gaussian-seed{seed}"
    return BenchmarkSplit.of(
        train=LabeledEmbeddingSet("two_gaussian", source, train, None),
        test=LabeledEmbeddingSet("two_gaussian", source, test, labels),
    )
