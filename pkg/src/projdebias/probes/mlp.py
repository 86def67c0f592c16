"""One-hidden-layer ReLU network with a softmax output, trained with Adam."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from projdebias.errors import DataError
from projdebias.probes.linear import ProbeReport, evaluate_probe


@dataclass(frozen=True, eq=False)
class MlpProbe:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    classes: np.ndarray

    def logits(self, X) -> np.ndarray:
        H = np.maximum(0.0, np.asarray(X, dtype=np.float64) @ self.W1 + self.b1)
        return H @ self.W2 + self.b2

    def predict(self, X) -> np.ndarray:
        return self.classes[np.argmax(self.logits(X), axis=1)]

    def accuracy(self, X, y) -> float:
        return float(np.mean(self.predict(X) == np.asarray(y)))


def train_mlp(
    X,
    y,
    hidden_width: int = 128,
    epochs: int = 50,
    seed: int = 0,
    lr: float = 0.01,
    lr_decay: float = 0.05,
    batch_size: int = 64,
    weight_decay: float = 0.03,
) -> MlpProbe:
    """Mini-batch Adam on cross-entropy; the step size at epoch ``e`` is
    ``lr / (1 + lr_decay * e)``. He initialisation, seeded. The small L2
    penalty ``weight_decay`` keeps the wide default network from
    overfitting noisy classes where a linear probe already does well."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] != y.shape[0] or X.shape[0] == 0:
        raise DataError("X must be a non-empty (n, d) array with one label per row")
    classes, codes = np.unique(y, return_inverse=True)
    if classes.size < 2:
        raise DataError("need at least two classes")
    n, d = X.shape
    k = classes.size
    rng = np.random.default_rng(seed)
    params = [
        rng.standard_normal((d, hidden_width)) * np.sqrt(2.0 / d),
        np.zeros(hidden_width),
        rng.standard_normal((hidden_width, k)) * np.sqrt(2.0 / hidden_width),
        np.zeros(k),
    ]
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    T = np.eye(k)[codes]
    t = 0
    for epoch in range(epochs):
        step = lr / (1.0 + lr_decay * epoch)
        perm = rng.permutation(n)
        for start in range(0, n, batch_size):
            idx = perm[start : start + batch_size]
            xb, tb = X[idx], T[idx]
            W1, b1, W2, b2 = params
            Z1 = xb @ W1 + b1
            H = np.maximum(0.0, Z1)
            Z2 = H @ W2 + b2
            Z2 -= Z2.max(axis=1, keepdims=True)
            P = np.exp(Z2)
            P /= P.sum(axis=1, keepdims=True)
            G2 = (P - tb) / idx.size
            gW2 = H.T @ G2 + weight_decay * W2
            gb2 = G2.sum(axis=0)
            G1 = (G2 @ W2.T) * (Z1 > 0)
            gW1 = xb.T @ G1 + weight_decay * W1
            gb1 = G1.sum(axis=0)
            t += 1
            for i, g in enumerate((gW1, gb1, gW2, gb2)):
                m[i] = beta1 * m[i] + (1 - beta1) * g
                v[i] = beta2 * v[i] + (1 - beta2) * g * g
                mhat = m[i] / (1 - beta1**t)
                vhat = v[i] / (1 - beta2**t)
                params[i] = params[i] - step * mhat / (np.sqrt(vhat) + eps)
    return MlpProbe(*params, classes)


def train_mlp_probe(
    X_train,
    y_train,
    X_test,
    y_test,
    hidden_width: int = 128,
    epochs: int = 50,
    seed: int = 0,
    **kwargs,
) -> ProbeReport:
    """Train on one split and report accuracy on another (``split='test'``)."""
    probe = train_mlp(X_train, y_train, hidden_width=hidden_width, epochs=epochs, seed=seed, **kwargs)
    return evaluate_probe(probe, X_test, y_test, "test")
