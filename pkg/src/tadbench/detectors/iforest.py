"""Isolation forest with exact harmonic-number path normalization.

Each of the ``tree_count`` trees (default 100) isolates a without-
replacement subsample of size psi = min(subsample, n) by recursive random
axis-aligned splits, stopping at depth ceil(log2 psi), at single points, or
when all remaining rows are identical. A query's path length is the depth
of the leaf it reaches plus c(leaf size), where

    c(m) = 2*H(m-1) - 2*(m-1)/m,   c(0) = c(1) = 0,

with H the exact harmonic number (so c(2) = 1), and the score is
2^(-mean_path / c(psi)). Per-tree randomness derives from spawned children
of the config seed, making fits bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from .base import FittedDetector, register
from .config import DetectorConfig


def average_path_lengths(max_size: int) -> np.ndarray:
    """Table of c(m) for m in 0..max_size using exact harmonic sums."""
    table = np.zeros(max_size + 1)
    harmonic = 0.0
    for m in range(2, max_size + 1):
        harmonic += 1.0 / (m - 1)
        table[m] = 2.0 * harmonic - 2.0 * (m - 1) / m
    return table


@dataclass(frozen=True)
class _Node:
    feature: int  # -1 marks a leaf
    threshold: float
    left: "_Node | None"
    right: "_Node | None"
    size: int


def _build(rows: np.ndarray, depth: int, cap: int, rng: np.random.Generator) -> _Node:
    n = rows.shape[0]
    if depth >= cap or n <= 1:
        return _Node(-1, 0.0, None, None, n)
    lo = rows.min(axis=0)
    hi = rows.max(axis=0)
    splittable = np.flatnonzero(hi > lo)
    if splittable.size == 0:
        return _Node(-1, 0.0, None, None, n)
    f = int(splittable[rng.integers(splittable.size)])
    t = float(rng.uniform(lo[f], hi[f]))
    goes_left = rows[:, f] < t
    return _Node(
        f,
        t,
        _build(rows[goes_left], depth + 1, cap, rng),
        _build(rows[~goes_left], depth + 1, cap, rng),
        n,
    )


def _path_length(node: _Node, q: np.ndarray, c_table: np.ndarray) -> float:
    depth = 0
    while node.feature >= 0:
        node = node.left if q[node.feature] < node.threshold else node.right
        depth += 1
    return depth + c_table[node.size]


class IForestDetector(FittedDetector):
    kind = "iforest"

    def __init__(self, dim: int, trees: list[_Node], psi: int, c_table: np.ndarray):
        super().__init__(dim)
        self._trees = trees
        self._c_psi = c_table[psi]
        self._c_table = c_table
        self.subsample_size = psi

    def _score(self, queries: np.ndarray) -> np.ndarray:
        out = np.empty(queries.shape[0])
        for i, q in enumerate(queries):
            total = 0.0
            for tree in self._trees:
                total += _path_length(tree, q, self._c_table)
            out[i] = 2.0 ** (-total / len(self._trees) / self._c_psi)
        return out


@register("iforest")
def fit_iforest(config: DetectorConfig, train: np.ndarray) -> IForestDetector:
    n = train.shape[0]
    if n < 2:
        raise ConfigError(f"iforest needs at least 2 training points, got {n}")
    psi = min(config.params["subsample"], n)
    cap = max(1, math.ceil(math.log2(psi))) if psi > 1 else 1
    c_table = average_path_lengths(max(psi, 2))
    trees = []
    for child in np.random.SeedSequence(config.seed).spawn(config.params["tree_count"]):
        rng = np.random.default_rng(child)
        sample = train[rng.choice(n, size=psi, replace=False)]
        trees.append(_build(sample, 0, cap, rng))
    return IForestDetector(train.shape[1], trees, psi, c_table)
