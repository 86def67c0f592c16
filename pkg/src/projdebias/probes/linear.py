"""Linear probes: L2-regularised hinge (SVM) and logistic classifiers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from projdebias.errors import DataError

TRAINERS = ("hinge", "logistic")


@dataclass(frozen=True, eq=False)
class LinearProbe:
    """One weight row per class (one-vs-rest), or a single row for two classes.

    With a single row, ``classes[1]`` is predicted when the score is >= 0.
    """

    weights: np.ndarray
    biases: np.ndarray
    classes: np.ndarray
    trainer: str
    hyperparameters: dict = field(default_factory=dict)

    def decision_function(self, X) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.weights.T + self.biases

    def predict(self, X) -> np.ndarray:
        scores = self.decision_function(X)
        if self.weights.shape[0] == 1:
            return self.classes[(scores[:, 0] >= 0).astype(int)]
        return self.classes[np.argmax(scores, axis=1)]

    def accuracy(self, X, y) -> float:
        y = np.asarray(y)
        if y.size == 0:
            raise DataError("cannot score an empty split")
        return float(np.mean(self.predict(X) == y))

    @property
    def directions(self) -> np.ndarray:
        """Weight rows, i.e. the directions an erasure step would remove."""
        return self.weights


@dataclass(frozen=True)
class ProbeReport:
    accuracy: float
    majority_rate: float
    per_class_accuracy: dict
    split: str
    n: int

    def guarded(self, margin: float) -> bool:
        """No better than the majority baseline plus ``margin``."""
        return self.accuracy <= self.majority_rate + margin

    def to_json(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "majority_rate": self.majority_rate,
            "per_class_accuracy": {str(k): v for k, v in self.per_class_accuracy.items()},
            "split": self.split,
            "n": self.n,
        }


def majority_rate(y) -> float:
    y = np.asarray(y)
    if y.size == 0:
        raise DataError("empty label array")
    _, counts = np.unique(y, return_counts=True)
    return float(counts.max() / y.size)


def evaluate_probe(probe, X, y, split: str = "dev") -> ProbeReport:
    y = np.asarray(y)
    pred = probe.predict(X)
    per_class = {}
    for c in np.unique(y):
        mask = y == c
        per_class[int(c) if np.issubdtype(type(c), np.integer) else c] = float(
            np.mean(pred[mask] == c)
        )
    return ProbeReport(
        accuracy=float(np.mean(pred == y)),
        majority_rate=majority_rate(y),
        per_class_accuracy=per_class,
        split=split,
        n=int(y.size),
    )


def _targets(y, classes):
    """+-1 target matrix: one column for two classes, one per class otherwise."""
    if classes.size == 2:
        return np.where(y == classes[1], 1.0, -1.0)[:, None]
    return np.where(y[:, None] == classes[None, :], 1.0, -1.0)


def _fit_hinge(X, Y, reg, epochs, batch_size, seed, min_updates=0):
    """Mini-batch Pegasos on all one-vs-rest problems at once.

    The bias is an extra constant feature. Iterates from the second half of
    training are averaged. Small inputs get extra epochs so that at least
    ``min_updates`` steps are taken.
    """
    n, d = X.shape
    Xa = np.hstack([X, np.ones((n, 1))])
    W = np.zeros((Y.shape[1], d + 1))
    W_avg = np.zeros_like(W)
    n_avg = 0
    rng = np.random.default_rng(seed)
    steps_per_epoch = -(-n // batch_size)
    epochs = max(epochs, -(-min_updates // steps_per_epoch))
    total = epochs * steps_per_epoch
    radius = 1.0 / np.sqrt(reg)
    t = 0
    for _ in range(epochs):
        perm = rng.permutation(n)
        for start in range(0, n, batch_size):
            idx = perm[start : start + batch_size]
            t += 1
            eta = 1.0 / (reg * t)
            xb, yb = Xa[idx], Y[idx]
            active = (yb * (xb @ W.T)) < 1.0
            grad = reg * W - ((active * yb).T @ xb) / idx.size
            W = W - eta * grad
            norms = np.linalg.norm(W, axis=1, keepdims=True)
            W = W * np.minimum(1.0, radius / np.maximum(norms, 1e-300))
            if t > total // 2:
                n_avg += 1
                W_avg += (W - W_avg) / n_avg
    W_final = W_avg if n_avg else W
    return W_final[:, :d], W_final[:, d], epochs


def _fit_logistic(X, y, classes, reg, max_iter):
    n, d = X.shape
    if classes.size == 2:
        t = (y == classes[1]).astype(np.float64)

        def loss(theta):
            w, b = theta[:d], theta[d]
            z = X @ w + b
            # log(1 + exp(-z)) for t=1, log(1 + exp(z)) for t=0
            l = np.logaddexp(0.0, z) - t * z
            p = 1.0 / (1.0 + np.exp(-z))
            g = p - t
            grad = np.concatenate([X.T @ g / n + reg * w, [g.mean()]])
            return l.mean() + 0.5 * reg * w @ w, grad

        res = minimize(loss, np.zeros(d + 1), jac=True, method="L-BFGS-B",
                       options={"maxiter": max_iter})
        return res.x[:d][None, :], np.array([res.x[d]])

    k = classes.size
    T = (y[:, None] == classes[None, :]).astype(np.float64)

    def loss(theta):
        W = theta[: k * d].reshape(k, d)
        b = theta[k * d :]
        Z = X @ W.T + b
        Z = Z - Z.max(axis=1, keepdims=True)
        logp = Z - np.log(np.exp(Z).sum(axis=1, keepdims=True))
        P = np.exp(logp)
        G = (P - T) / n
        grad = np.concatenate([(G.T @ X + reg * W).ravel(), G.sum(axis=0)])
        return -(T * logp).sum() / n + 0.5 * reg * np.sum(W * W), grad

    res = minimize(loss, np.zeros(k * (d + 1)), jac=True, method="L-BFGS-B",
                   options={"maxiter": max_iter})
    return res.x[: k * d].reshape(k, d), res.x[k * d :]


def train_linear(
    X,
    y,
    trainer: str = "hinge",
    reg: float | None = None,
    epochs: int = 40,
    batch_size: int = 32,
    seed: int = 0,
    max_iter: int = 500,
    min_updates: int = 1000,
) -> LinearProbe:
    """Fit a linear probe on ``(X, y)``.

    ``reg`` is the L2 strength on the mean loss; the default ``1 / n`` is a
    unit penalty per misclassified point relative to the margin term.
    ``hinge`` is deterministic given ``seed`` and runs at least ``epochs``
    epochs and at least ``min_updates`` mini-batch steps; ``logistic`` uses
    L-BFGS and ignores the three.
    """
    if trainer not in TRAINERS:
        raise ValueError(f"unknown trainer {trainer!r}; expected one of {TRAINERS}")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DataError("X must be (n, d) with one label per row")
    classes = np.unique(y)
    if classes.size < 2:
        raise DataError("need at least two classes to train a probe")
    if reg is None:
        reg = 1.0 / X.shape[0]
    if reg <= 0:
        raise ValueError("reg must be positive")
    if trainer == "hinge":
        W, b, ran = _fit_hinge(X, _targets(y, classes), reg, epochs, batch_size, seed, min_updates)
        hp = {"reg": reg, "epochs": ran, "batch_size": batch_size, "seed": seed}
    else:
        W, b = _fit_logistic(X, y, classes, reg, max_iter)
        hp = {"reg": reg, "max_iter": max_iter}
    return LinearProbe(W, b, classes, trainer, hp)
