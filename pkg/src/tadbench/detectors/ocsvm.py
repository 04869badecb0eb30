"""One-class SVM: RBF kernel, dual solved by pairwise coordinate descent.

The dual problem is

    min_a  (1/2) a^T Q a    s.t.  0 <= a_i <= C,  sum a = 1,

with Q_ij = exp(-gamma ||x_i - x_j||^2) and C = 1/(nu*n). Each iteration
moves mass between the most violating pair: i with the smallest gradient
among coordinates that can grow, j with the largest among those that can
shrink. The step is the unconstrained parabola minimum clipped to the box.
Convergence means the maximal violation g_j - g_i drops below 1e-6; hitting
the iteration cap instead raises a fit error carrying the duality gap.

gamma defaults to the "scale" rule 1/(d * mean per-dimension variance),
falling back to 1/d for zero-variance data. The anomaly score is
rho - sum_i a_i K(x_i, q), positive beyond the learned boundary.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

from ..errors import FitError
from .base import FittedDetector, register
from .config import DetectorConfig

_KKT_TOL = 1e-6
_MAX_ITER = 10_000


def rbf_gamma(train: np.ndarray, mode) -> float:
    if mode != "scale":
        return float(mode)
    d = train.shape[1]
    mean_var = float(train.var(axis=0).mean())
    if mean_var <= 0:
        return 1.0 / d
    return 1.0 / (d * mean_var)


def _initial_alpha(n: int, c: float) -> np.ndarray:
    """Feasible start: fill coordinates with C until the unit sum is spent."""
    alpha = np.zeros(n)
    full = int(1.0 / c)  # == floor(nu * n) up to float representation
    full = min(full, n)
    alpha[:full] = c
    rest = 1.0 - full * c
    if rest > 0 and full < n:
        alpha[full] = rest
    return alpha


def _duality_gap(alpha: np.ndarray, g: np.ndarray, c: float) -> float:
    """Primal-minus-dual value, minimized over the free offset rho.

    The primal objective at (w(alpha), rho) is a^T Q a - rho
    + C * sum_i max(0, rho - g_i) after substituting slacks; the best rho
    is attained at one of the g_i, so evaluating all candidates is exact.
    """
    aqa = float(alpha @ g)
    candidates = aqa - g + c * np.maximum(0.0, g[:, None] - g[None, :]).sum(axis=1)
    return float(candidates.min())


class OcsvmDetector(FittedDetector):
    kind = "ocsvm"

    def __init__(self, train: np.ndarray, alpha: np.ndarray, rho: float, gamma: float):
        super().__init__(train.shape[1])
        self._train = train
        self.alpha = alpha
        self.rho = rho
        self.gamma = gamma

    def decision_values(self, queries: np.ndarray) -> np.ndarray:
        """sum_i a_i K(x_i, q) - rho; negative means anomalous."""
        k = np.exp(-self.gamma * cdist(queries, self._train, "sqeuclidean"))
        return k @ self.alpha - self.rho

    def _score(self, queries: np.ndarray) -> np.ndarray:
        return -self.decision_values(queries)

    def dual_objective(self) -> float:
        k = np.exp(-self.gamma * cdist(self._train, self._train, "sqeuclidean"))
        return -0.5 * float(self.alpha @ k @ self.alpha)


@register("ocsvm")
def fit_ocsvm(config: DetectorConfig, train: np.ndarray) -> OcsvmDetector:
    n = train.shape[0]
    nu = config.params["nu"]
    c = 1.0 / (nu * n)
    gamma = rbf_gamma(train, config.params["gamma"])

    q = np.exp(-gamma * cdist(train, train, "sqeuclidean"))
    alpha = _initial_alpha(n, c)
    g = q @ alpha

    eps = 1e-12
    converged = False
    for _ in range(_MAX_ITER):
        can_grow = alpha < c - eps
        can_shrink = alpha > eps
        if not can_grow.any() or not can_shrink.any():
            converged = True
            break
        i = int(np.flatnonzero(can_grow)[np.argmin(g[can_grow])])
        j = int(np.flatnonzero(can_shrink)[np.argmax(g[can_shrink])])
        violation = g[j] - g[i]
        if violation < _KKT_TOL:
            converged = True
            break
        quad = q[i, i] + q[j, j] - 2.0 * q[i, j]
        step = violation / max(quad, 1e-12)
        step = min(step, c - alpha[i], alpha[j])
        alpha[i] += step
        alpha[j] -= step
        g += step * (q[:, i] - q[:, j])

    if not converged:
        gap = _duality_gap(alpha, g, c)
        raise FitError(
            f"ocsvm dual did not converge within {_MAX_ITER} iterations",
            duality_gap=gap,
        )

    free = (alpha > eps) & (alpha < c - eps)
    if free.any():
        rho = float(g[free].mean())
    else:
        lo = g[alpha < c - eps].min() if (alpha < c - eps).any() else g.min()
        hi = g[alpha > eps].max()
        rho = float(lo + hi) / 2.0
    return OcsvmDetector(train, alpha, rho, gamma)
