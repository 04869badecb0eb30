"""Deep support vector data description (one-class embedding).

The encoder has widths [d, min(512, d), min(64, d)] with a ReLU hidden
layer and a bias-free linear output; removing the last bias is the
standard guard against the trivial constant solution. The hypersphere
center c is the mean encoder output under the initial weights and never
moves. Training minimizes

    mean_i ||phi(x_i) - c||^2 + (weight_decay / 2) * sum_W ||W||_F^2,

and the anomaly score of a query is ||phi(q) - c||^2. If the mean training
score still collapses below 1e-12 the fit emits a CollapseWarning rather
than failing, since the fitted object remains usable for inspection.
"""

from __future__ import annotations

import warnings

import numpy as np

from ..errors import CollapseWarning
from .base import FittedDetector, register
from .config import DetectorConfig
from .nets import DenseNet, he_init, minibatch_train


def dsvdd_widths(d: int) -> list[int]:
    return [d, min(512, d), min(64, d)]


def _distance_loss_and_grads(net: DenseNet, batch: np.ndarray, center: np.ndarray, weight_decay: float):
    out, caches = net.forward(batch)
    resid = out - center
    loss = float(np.mean(np.einsum("ij,ij->i", resid, resid)))
    grad_out = (2.0 / batch.shape[0]) * resid
    grad_w, grad_b = net.backward(caches, grad_out)
    if weight_decay > 0:
        for i, w in enumerate(net.weights):
            loss += 0.5 * weight_decay * float(np.sum(w * w))
            grad_w[i] = grad_w[i] + weight_decay * w
    return loss, grad_w, grad_b


class DsvddDetector(FittedDetector):
    kind = "dsvdd"

    def __init__(self, dim: int, net: DenseNet, center: np.ndarray):
        super().__init__(dim)
        self._net = net
        self.center = center

    def _score(self, queries: np.ndarray) -> np.ndarray:
        out, _ = self._net.forward(queries)
        resid = out - self.center
        return np.einsum("ij,ij->i", resid, resid)


@register("dsvdd")
def fit_dsvdd(config: DetectorConfig, train: np.ndarray) -> DsvddDetector:
    p = config.params
    rng = np.random.default_rng(config.seed)
    net = he_init(dsvdd_widths(train.shape[1]), rng, last_bias=False)
    center = net.forward(train)[0].mean(axis=0)
    center.setflags(write=False)

    wd = p["weight_decay"]
    minibatch_train(
        net,
        train,
        epochs=p["epochs"],
        batch_size=p["batch_size"],
        learning_rate=p["learning_rate"],
        rng=rng,
        loss_and_grads=lambda n, b: _distance_loss_and_grads(n, b, center, wd),
    )
    model = DsvddDetector(train.shape[1], net, center)
    if float(np.mean(model._score(train))) < 1e-12:
        warnings.warn(
            "dsvdd training collapsed to the trivial constant solution "
            "(mean train score < 1e-12)",
            CollapseWarning,
            stacklevel=2,
        )
    return model
