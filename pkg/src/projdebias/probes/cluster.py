"""k-means (Lloyd with k-means++ seeding) and the V-measure."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from projdebias.errors import DataError


@dataclass(frozen=True)
class VMeasure:
    v: float
    homogeneity: float
    completeness: float

    def to_json(self) -> dict:
        return {"v_measure": self.v, "homogeneity": self.homogeneity, "completeness": self.completeness}


def _kmeans_pp(X, K, rng):
    n = X.shape[0]
    centers = [X[rng.integers(n)]]
    d2 = np.sum((X - centers[0]) ** 2, axis=1)
    for _ in range(1, K):
        total = d2.sum()
        if total <= 0:
            idx = rng.integers(n)
        else:
            idx = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        centers.append(X[idx])
        d2 = np.minimum(d2, np.sum((X - X[idx]) ** 2, axis=1))
    return np.array(centers)


def _sq_dists(X, C):
    return np.maximum(
        np.sum(X * X, axis=1)[:, None] - 2 * X @ C.T + np.sum(C * C, axis=1)[None, :], 0.0
    )


def kmeans(X, K: int, seed: int = 0, restarts: int = 10, max_iter: int = 300, tol: float = 1e-10):
    """Best-of-``restarts`` Lloyd clustering. Returns ``(assignments, centers, inertia)``."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if not 1 <= K <= n:
        raise DataError(f"K={K} must lie in [1, n={n}]")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(restarts):
        C = _kmeans_pp(X, K, rng)
        prev = np.inf
        for _ in range(max_iter):
            D = _sq_dists(X, C)
            assign = np.argmin(D, axis=1)
            inertia = float(D[np.arange(n), assign].sum())
            for j in range(K):
                members = X[assign == j]
                if members.shape[0]:
                    C[j] = members.mean(axis=0)
                else:  # re-seed an empty cluster at the worst-fitted point
                    C[j] = X[int(np.argmax(D[np.arange(n), assign]))]
            if prev - inertia <= tol * max(1.0, prev):
                break
            prev = inertia
        D = _sq_dists(X, C)
        assign = np.argmin(D, axis=1)
        inertia = float(D[np.arange(n), assign].sum())
        if best is None or inertia < best[2]:
            best = (assign, C.copy(), inertia)
    return best


def _entropy(counts):
    counts = counts[counts > 0].astype(np.float64)
    p = counts / counts.sum()
    return float(-(p * np.log(p)).sum())


def v_measure(labels_true, labels_pred) -> VMeasure:
    """Homogeneity, completeness and their harmonic mean from the contingency table."""
    a = np.asarray(labels_true)
    b = np.asarray(labels_pred)
    if a.shape != b.shape or a.size == 0:
        raise DataError("label arrays must be non-empty and of equal length")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1))
    np.add.at(table, (ai, bi), 1)
    n = a.size
    h_c = _entropy(table.sum(axis=1))
    h_k = _entropy(table.sum(axis=0))
    nz = table > 0
    joint = table[nz] / n
    # conditional entropies H(C|K) and H(K|C)
    pk = (table.sum(axis=0) / n)[np.nonzero(nz)[1]]
    pc = (table.sum(axis=1) / n)[np.nonzero(nz)[0]]
    h_c_given_k = float(-(joint * np.log(joint / pk)).sum())
    h_k_given_c = float(-(joint * np.log(joint / pc)).sum())
    hom = 1.0 if h_c == 0 else 1.0 - h_c_given_k / h_c
    com = 1.0 if h_k == 0 else 1.0 - h_k_given_c / h_k
    v = 0.0 if hom + com == 0 else 2 * hom * com / (hom + com)
    return VMeasure(float(v), float(hom), float(com))


def kmeans_vmeasure(points, labels, K: int = 2, seed: int = 0, restarts: int = 10) -> VMeasure:
    assign, _, _ = kmeans(points, K, seed=seed, restarts=restarts)
    return v_measure(labels, assign)
