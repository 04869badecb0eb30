"""Low-rank analysis and completion of performance matrices.

A performance matrix (embeddings × detectors, AUROC in percent) is close to
rank one in practice, so a handful of measured cells pins down the rest.
This module provides the singular-spectrum summary that quantifies that
claim, MCAR masking to simulate unmeasured cells, rank-r completion by
alternating least squares from an SVD warm start, and MAPE evaluation of the
recovered cells.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .data.perfcsv import save_performance_matrix
from .data.types import PerformanceMatrix
from .errors import (
    CompletionError,
    MaskError,
    MetricError,
    ObservedCellError,
    SpectrumError,
)
from .metrics import RecoveryReport

_MASK_RETRIES = 1000
_DEFAULT_MAX_ITER = 500
_DEFAULT_REL_TOL = 1e-9


@dataclass(frozen=True)
class SpectrumSummary:
    """Singular values of a matrix and their cumulative contribution ratio.

    ``ccr_curve[j-1]`` is the fraction of the singular-value sum captured
    by the top j values; it is non-decreasing and ends at 1.
    """

    singular_values: np.ndarray
    ccr_curve: np.ndarray

    def __post_init__(self):
        sv = np.asarray(self.singular_values, dtype=np.float64)
        ccr = np.asarray(self.ccr_curve, dtype=np.float64)
        if sv.shape != ccr.shape or sv.ndim != 1:
            raise ValueError("singular_values and ccr_curve must match in length")
        if np.any(sv < 0) or np.any(np.diff(sv) > 0):
            raise ValueError("singular values must be non-negative and sorted descending")
        if np.any(np.diff(ccr) < 0) or abs(ccr[-1] - 1.0) > 1e-12:
            raise ValueError("ccr must be non-decreasing and end at 1")
        sv.setflags(write=False)
        ccr.setflags(write=False)
        object.__setattr__(self, "singular_values", sv)
        object.__setattr__(self, "ccr_curve", ccr)

    def ccr(self, j: int) -> float:
        """Cumulative contribution ratio of the top ``j`` singular values."""
        if not 1 <= j <= self.ccr_curve.size:
            raise ValueError(f"j must be in [1, {self.ccr_curve.size}]")
        return float(self.ccr_curve[j - 1])


def spectrum(pm: PerformanceMatrix) -> SpectrumSummary:
    """Full singular-value spectrum and ccr curve of a complete matrix.

    Raises:
        SpectrumError: on missing cells or an all-zero matrix.
    """
    if not pm.is_complete:
        raise SpectrumError("matrix has missing cells")
    sv = np.linalg.svd(pm.values, compute_uv=False)
    cum = np.cumsum(sv)
    if cum[-1] == 0.0:
        raise SpectrumError("zero matrix has no contribution ratios")
    # dividing by the cumulative total makes the curve end at exactly 1.0
    return SpectrumSummary(singular_values=sv, ccr_curve=cum / cum[-1])


@dataclass(frozen=True)
class ObservationMask:
    """The set Ω of observed cells of an m×n matrix.

    Invariants: the hidden-cell count equals round(missing_rate · m · n),
    and every row and every column keeps at least one observed cell (the
    identifiability requirement for rank-1 completion).
    """

    shape: tuple[int, int]
    observed: frozenset[tuple[int, int]]
    missing_rate: float

    def __post_init__(self):
        m, n = self.shape
        if m < 1 or n < 1:
            raise ValueError(f"bad shape {self.shape}")
        if not 0.0 <= self.missing_rate < 1.0:
            raise ValueError(f"missing_rate {self.missing_rate} not in [0,1)")
        observed = frozenset((int(r), int(c)) for r, c in self.observed)
        for r, c in observed:
            if not (0 <= r < m and 0 <= c < n):
                raise ValueError(f"cell ({r},{c}) outside shape {self.shape}")
        n_hidden = int(round(self.missing_rate * m * n))
        if len(observed) + n_hidden != m * n:
            raise ValueError(
                f"|observed|={len(observed)} inconsistent with "
                f"missing_rate={self.missing_rate} on shape {self.shape}"
            )
        rows = {r for r, _ in observed}
        cols = {c for _, c in observed}
        if len(rows) < m or len(cols) < n:
            raise MaskError("every row and column needs at least one observed cell")
        object.__setattr__(self, "observed", observed)
        object.__setattr__(self, "shape", (int(m), int(n)))

    @cached_property
    def observed_bool(self) -> np.ndarray:
        """Boolean m×n array, True at observed cells."""
        grid = np.zeros(self.shape, dtype=bool)
        rows, cols = zip(*self.observed)
        grid[list(rows), list(cols)] = True
        grid.setflags(write=False)
        return grid

    @property
    def n_hidden(self) -> int:
        return self.shape[0] * self.shape[1] - len(self.observed)

    @classmethod
    def from_observed_bool(cls, grid: np.ndarray) -> "ObservationMask":
        """Build a mask from a boolean observed-cell array."""
        grid = np.asarray(grid, dtype=bool)
        m, n = grid.shape
        observed = frozenset(zip(*np.nonzero(grid)))
        return cls(
            shape=(m, n),
            observed=observed,
            missing_rate=(m * n - len(observed)) / (m * n),
        )


def mcar_mask(shape: tuple[int, int], missing_rate: float, seed: int) -> ObservationMask:
    """Hide exactly round(missing_rate · m · n) cells uniformly at random.

    Draws are resampled (up to 1000 times) until every row and column keeps
    at least one observed cell. Deterministic in (shape, rate, seed).

    Raises:
        MaskError: if no draw satisfies the coverage requirement within the
            retry budget (the rate is too high for the shape).
    """
    m, n = shape
    if m < 1 or n < 1:
        raise ValueError(f"bad shape {shape}")
    if not 0.0 <= missing_rate < 1.0:
        raise ValueError(f"missing_rate {missing_rate} not in [0,1)")
    n_hidden = int(round(missing_rate * m * n))
    rng = np.random.default_rng(seed)
    for _ in range(_MASK_RETRIES):
        hidden_flat = rng.choice(m * n, size=n_hidden, replace=False)
        observed = np.ones(m * n, dtype=bool)
        observed[hidden_flat] = False
        grid = observed.reshape(m, n)
        if grid.any(axis=1).all() and grid.any(axis=0).all():
            return ObservationMask.from_observed_bool(grid)
    raise MaskError(
        f"no mask with row/column coverage found for shape {shape} at "
        f"missing_rate {missing_rate} after {_MASK_RETRIES} attempts"
    )


@dataclass(frozen=True)
class CompletionResult:
    """Rank-r factorization fitted to the observed cells.

    ``recovered`` is U·Vᵀ, so its rank never exceeds r. ``objective_trace``
    holds the masked squared error after the warm start (index 0) and after
    each alternating sweep.
    """

    U: np.ndarray
    V: np.ndarray
    recovered: np.ndarray = field(repr=False)
    iterations: int
    final_objective: float
    converged: bool
    objective_trace: tuple[float, ...] = field(repr=False)


def _masked_objective(P: np.ndarray, observed: np.ndarray, U: np.ndarray, V: np.ndarray) -> float:
    resid = (U @ V.T - P)[observed]
    return float(resid @ resid)


def complete(
    pm: PerformanceMatrix,
    mask: ObservationMask,
    r: int = 1,
    *,
    max_iter: int = _DEFAULT_MAX_ITER,
    rel_tol: float = _DEFAULT_REL_TOL,
) -> CompletionResult:
    """Fit a rank-r factorization to the observed cells of ``pm``.

    Minimizes the squared error over observed cells by alternating
    closed-form least-squares updates of the row factors U and column
    factors V, starting from the best rank-r SVD of the zero-filled
    observed matrix (U = U₀Σ₀^½, V = V₀Σ₀^½). Stops when the relative
    objective decrease drops below ``rel_tol`` or after ``max_iter``
    sweeps.

    Raises:
        CompletionError: if the objective becomes non-finite.
    """
    if mask.shape != (pm.m, pm.n):
        raise ValueError(f"mask shape {mask.shape} does not match matrix {(pm.m, pm.n)}")
    if r < 1 or r > min(pm.m, pm.n):
        raise ValueError(f"rank r={r} not in [1, {min(pm.m, pm.n)}]")

    observed = mask.observed_bool
    if np.any(np.isnan(pm.values[observed])):
        raise ValueError("observed cells must not be NaN")
    P = np.where(observed, np.nan_to_num(pm.values, nan=0.0), 0.0)

    u0, s0, v0t = np.linalg.svd(P, full_matrices=False)
    root_s = np.sqrt(s0[:r])
    U = u0[:, :r] * root_s
    V = v0t[:r].T * root_s

    obj = _masked_objective(P, observed, U, V)
    trace = [obj]
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        # closed-form row updates: each row of U solves a small masked LS
        for i in range(pm.m):
            cols = observed[i]
            if cols.any():
                U[i], *_ = np.linalg.lstsq(V[cols], P[i, cols], rcond=None)
        for j in range(pm.n):
            rows = observed[:, j]
            if rows.any():
                V[j], *_ = np.linalg.lstsq(U[rows], P[rows, j], rcond=None)

        prev, obj = obj, _masked_objective(P, observed, U, V)
        if not np.isfinite(obj):
            raise CompletionError(f"objective became non-finite at sweep {iterations}")
        trace.append(obj)
        if prev == 0.0 or (prev - obj) / prev < rel_tol:
            converged = True
            break

    return CompletionResult(
        U=U,
        V=V,
        recovered=U @ V.T,
        iterations=iterations,
        final_objective=obj,
        converged=converged,
        objective_trace=tuple(trace),
    )


def evaluate_recovery(
    pm: PerformanceMatrix, mask: ObservationMask, result: CompletionResult
) -> RecoveryReport:
    """MAPE of the recovered values on the hidden cells of ``pm``.

    Raises:
        MetricError: if a hidden cell's true value is 0 or NaN.
    """
    hidden = ~mask.observed_bool
    true_values = pm.values[hidden]
    if np.any(np.isnan(true_values)):
        raise MetricError("hidden cells include missing true values")
    return RecoveryReport.build(
        true_values=true_values,
        predicted=result.recovered[hidden],
        missing_rate=mask.missing_rate,
    )


def mean_recovery_mape(
    pm: PerformanceMatrix,
    missing_rate: float,
    *,
    r: int = 1,
    n_seeds: int = 10,
    base_seed: int = 0,
) -> tuple[float, list[float]]:
    """Mean hidden-cell MAPE over ``n_seeds`` MCAR masks.

    Returns the mean and the per-seed values (seeds base_seed..base_seed+n-1).
    """
    per_seed = []
    for seed in range(base_seed, base_seed + n_seeds):
        mask = mcar_mask((pm.m, pm.n), missing_rate, seed)
        result = complete(pm, mask, r=r)
        per_seed.append(evaluate_recovery(pm, mask, result).mape)
    return float(np.mean(per_seed)), per_seed


@dataclass(frozen=True)
class CellPrediction:
    """Predicted values for requested hidden cells plus run bookkeeping."""

    cells: tuple[tuple[int, int], ...]
    values: np.ndarray
    duration_seconds: float
    completion: CompletionResult


def mask_from_missing(pm: PerformanceMatrix) -> ObservationMask:
    """Treat the NaN cells of ``pm`` as the hidden set."""
    return ObservationMask.from_observed_bool(~np.isnan(pm.values))


def predict_cells(
    pm_partial: PerformanceMatrix,
    target_cells: list[tuple[int, int]],
    r: int = 1,
) -> CellPrediction:
    """Complete a partially observed matrix and read off the target cells.

    ``pm_partial`` must carry its mask as NaN cells; every target must be
    one of them.

    Raises:
        ObservedCellError: if a target cell is observed.
    """
    mask = mask_from_missing(pm_partial)
    targets = [(int(i), int(j)) for i, j in target_cells]
    for i, j in targets:
        if not (0 <= i < pm_partial.m and 0 <= j < pm_partial.n):
            raise ValueError(f"target cell ({i},{j}) outside matrix")
        if (i, j) in mask.observed:
            raise ObservedCellError(f"cell ({i},{j}) is observed; nothing to predict")
    start = time.perf_counter()
    result = complete(pm_partial, mask, r=r)
    duration = time.perf_counter() - start
    values = np.array([result.recovered[i, j] for i, j in targets])
    return CellPrediction(
        cells=tuple(targets),
        values=values,
        duration_seconds=duration,
        completion=result,
    )


def export_completion(
    pm: PerformanceMatrix,
    mask: ObservationMask,
    result: CompletionResult,
    csv_path: str | os.PathLike,
    json_path: str | os.PathLike,
    *,
    seed: int | None = None,
    duration_seconds: float | None = None,
) -> None:
    """Write the recovered matrix as CSV plus a JSON run report.

    The report carries the objective trace, MAPE, missing rate, rank, and
    seed; ``duration_seconds`` is included only when provided, so callers
    needing byte-stable outputs can omit it.
    """
    recovered = PerformanceMatrix(
        dataset=pm.dataset,
        row_labels=pm.row_labels,
        col_labels=pm.col_labels,
        values=np.clip(result.recovered, 0.0, 100.0),
    )
    save_performance_matrix(recovered, csv_path)
    hidden_true = pm.values[~mask.observed_bool]
    mape_known = (
        hidden_true.size > 0
        and not np.any(np.isnan(hidden_true))
        and not np.any(hidden_true == 0)
    )
    report = {
        "dataset": pm.dataset,
        "rank": result.U.shape[1],
        "missing_rate": mask.missing_rate,
        "seed": seed,
        "iterations": result.iterations,
        "converged": result.converged,
        "final_objective": result.final_objective,
        "objective_trace": list(result.objective_trace),
        "mape": evaluate_recovery(pm, mask, result).mape if mape_known else None,
    }
    if duration_seconds is not None:
        report["duration_seconds"] = duration_seconds
    Path(json_path).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
