"""Autoencoder scored by squared reconstruction error.

The symmetric net has widths [d, min(512, d), min(64, d), min(512, d), d],
ReLU between layers and a linear output. Training minimizes the mean
squared error averaged over both batch rows and features; the anomaly
score of a query is its total squared reconstruction error ||x_hat - x||^2.
With epochs=0 the score reflects the seeded initial weights, which keeps
the whole pipeline well-defined without training.
"""

from __future__ import annotations

import numpy as np

from .base import FittedDetector, register
from .config import DetectorConfig
from .nets import DenseNet, he_init, minibatch_train


def ae_widths(d: int) -> list[int]:
    return [d, min(512, d), min(64, d), min(512, d), d]


def reconstruction_loss_and_grads(net: DenseNet, batch: np.ndarray):
    out, caches = net.forward(batch)
    resid = out - batch
    loss = float(np.mean(resid * resid))
    grad_out = (2.0 / resid.size) * resid
    grad_w, grad_b = net.backward(caches, grad_out)
    return loss, grad_w, grad_b


class AeDetector(FittedDetector):
    kind = "ae"

    def __init__(self, dim: int, net: DenseNet):
        super().__init__(dim)
        self._net = net

    def _score(self, queries: np.ndarray) -> np.ndarray:
        out, _ = self._net.forward(queries)
        resid = out - queries
        return np.einsum("ij,ij->i", resid, resid)


@register("ae")
def fit_ae(config: DetectorConfig, train: np.ndarray) -> AeDetector:
    p = config.params
    rng = np.random.default_rng(config.seed)
    net = he_init(ae_widths(train.shape[1]), rng)
    minibatch_train(
        net,
        train,
        epochs=p["epochs"],
        batch_size=p["batch_size"],
        learning_rate=p["learning_rate"],
        rng=rng,
        loss_and_grads=reconstruction_loss_and_grads,
    )
    return AeDetector(train.shape[1], net)
