"""Minimal dense-network machinery for the two deep detectors.

A network is a list of affine layers with ReLU after every layer except the
last (linear output). Weights start He-normal, biases at zero; a layer may
be built without a bias. Training uses adaptive-moment gradient descent
with the usual bias-corrected first/second moment estimates. Everything is
plain float64 numpy driven by one seeded generator, so a fixed (seed, data,
config) triple reproduces training bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import FitError

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class DenseNet:
    """Affine layers; ``biases[i]`` is None for bias-free layers."""

    weights: list[np.ndarray]
    biases: list[np.ndarray | None]

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def parameters(self):
        for i, w in enumerate(self.weights):
            yield ("w", i, w)
            if self.biases[i] is not None:
                yield ("b", i, self.biases[i])

    def forward(self, x: np.ndarray):
        """Return (output, caches); caches feed backward()."""
        caches = []
        h = x
        last = self.n_layers - 1
        for i, w in enumerate(self.weights):
            pre = h @ w
            if self.biases[i] is not None:
                pre = pre + self.biases[i]
            caches.append((h, pre))
            h = pre if i == last else np.maximum(pre, 0.0)
        return h, caches

    def backward(self, caches, grad_out: np.ndarray):
        """Gradients of a scalar loss wrt every parameter, given dL/d(output)."""
        grad_w = [None] * self.n_layers
        grad_b = [None] * self.n_layers
        g = grad_out
        for i in range(self.n_layers - 1, -1, -1):
            h_in, pre = caches[i]
            if i != self.n_layers - 1:
                g = g * (pre > 0.0)
            grad_w[i] = h_in.T @ g
            if self.biases[i] is not None:
                grad_b[i] = g.sum(axis=0)
            g = g @ self.weights[i].T
        return grad_w, grad_b


def he_init(widths: list[int], rng: np.random.Generator, last_bias: bool = True) -> DenseNet:
    """W ~ N(0, 2/fan_in) per layer, zero biases."""
    weights = []
    biases: list[np.ndarray | None] = []
    last = len(widths) - 2
    for i in range(len(widths) - 1):
        fan_in, fan_out = widths[i], widths[i + 1]
        weights.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out) if (last_bias or i != last) else None)
    return DenseNet(weights, biases)


class Adam:
    def __init__(self, net: DenseNet, learning_rate: float):
        self.lr = learning_rate
        self.t = 0
        self._m = [(np.zeros_like(w), None if b is None else np.zeros_like(b))
                   for w, b in zip(net.weights, net.biases)]
        self._v = [(np.zeros_like(w), None if b is None else np.zeros_like(b))
                   for w, b in zip(net.weights, net.biases)]

    def step(self, net: DenseNet, grad_w, grad_b):
        self.t += 1
        c1 = 1.0 - ADAM_BETA1**self.t
        c2 = 1.0 - ADAM_BETA2**self.t
        for i in range(net.n_layers):
            pairs = [(net.weights[i], grad_w[i], 0)]
            if net.biases[i] is not None:
                pairs.append((net.biases[i], grad_b[i], 1))
            for param, grad, slot in pairs:
                m = self._m[i][slot]
                v = self._v[i][slot]
                m *= ADAM_BETA1
                m += (1.0 - ADAM_BETA1) * grad
                v *= ADAM_BETA2
                v += (1.0 - ADAM_BETA2) * grad * grad
                param -= self.lr * (m / c1) / (np.sqrt(v / c2) + ADAM_EPS)


def minibatch_train(net, x, epochs, batch_size, learning_rate, rng, loss_and_grads):
    """Shuffled minibatch loop; raises on a non-finite loss.

    ``loss_and_grads(net, batch)`` returns (loss, grad_w, grad_b).
    """
    adam = Adam(net, learning_rate)
    n = x.shape[0]
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            batch = x[order[start:start + batch_size]]
            loss, grad_w, grad_b = loss_and_grads(net, batch)
            if not np.isfinite(loss):
                raise FitError(
                    "training diverged (non-finite loss); try a lower learning rate"
                )
            adam.step(net, grad_w, grad_b)
