"""Worst-case instance for single-projection guarding and its bound checks.

``P`` sits near the vertices of a regular simplex in the first ``d``
coordinates; ``Q`` is a tight cluster far along the last axis. Whatever
direction is projected out, a hyperplane keeps the points of all but one
simplex vertex on one side and the whole cluster on the other, so the best
linear classifier misclassifies at most ``ceil(m / (d + 1))`` points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from projdebias.geometry.classify import best_linear_classifier
from projdebias.geometry.projection import UnitVector, orthonormal_complement, project_along


@dataclass(frozen=True, eq=False)
class AdversarialInstance:
    P: np.ndarray
    Q: np.ndarray
    d: int
    C: float
    eps: float
    vertices: np.ndarray
    vertex_of: np.ndarray

    @property
    def ambient_dim(self) -> int:
        return self.d + 1

    @property
    def center(self) -> np.ndarray:
        c = np.zeros(self.d + 1)
        c[-1] = self.C
        return c

    def misclassification_bound(self) -> int:
        """``ceil(m / (d + 1))``: what the construction guarantees."""
        return math.ceil(self.P.shape[0] / (self.d + 1))


def regular_simplex(d: int) -> np.ndarray:
    """``(d + 1) x d`` vertices of a regular simplex, centred, unit radius."""
    if d < 1:
        raise ValueError("d must be >= 1")
    E = np.eye(d + 1) - 1.0 / (d + 1)
    # orthonormal basis of the sum-zero hyperplane
    _, _, vt = np.linalg.svd(E)
    V = E @ vt[:d].T
    return V / np.linalg.norm(V, axis=1, keepdims=True)


def _uniform_ball(rng, count, dim, radius):
    g = rng.standard_normal((count, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.random(count) ** (1.0 / dim)
    return g * r[:, None]


def build_adversarial_instance(
    d: int,
    m: int,
    n: int,
    C: float | None = None,
    eps: float | None = None,
    rng_seed=0,
    p_jitter: float | None = None,
) -> AdversarialInstance:
    """Instance in ``R^(d+1)`` with ``C = 4d`` and ``eps = 1/(2d)`` by default.

    Points of ``P`` are dealt round-robin to the simplex vertices, so no
    vertex gets more than ``ceil(m / (d + 1))``, and jittered by at most
    ``p_jitter`` (default ``eps / 10``) inside the first ``d`` coordinates.
    """
    if d < 1 or m < 1 or n < 1:
        raise ValueError("d, m and n must be positive")
    C = 4.0 * d if C is None else float(C)
    eps = 1.0 / (2.0 * d) if eps is None else float(eps)
    p_jitter = eps / 10.0 if p_jitter is None else float(p_jitter)
    if p_jitter >= eps:
        raise ValueError("p_jitter must be smaller than eps")
    rng = np.random.default_rng(rng_seed)
    V = regular_simplex(d)
    vertex_of = np.arange(m) % (d + 1)
    P = np.zeros((m, d + 1))
    P[:, :d] = V[vertex_of] + _uniform_ball(rng, m, d, p_jitter)
    Q = _uniform_ball(rng, n, d + 1, eps)
    Q[:, -1] += C
    return AdversarialInstance(P, Q, d, C, eps, V, vertex_of)


def simplex_lemma_direction(vertices: np.ndarray, p) -> np.ndarray:
    """Unit ``r`` with ``v_i . r <= p . r - 1/d`` for at least ``d`` vertices.

    Writes ``p`` in affine coordinates of the vertices and returns the vertex
    with the largest coefficient.
    """
    V = np.asarray(vertices, dtype=np.float64)
    d = V.shape[1]
    A = np.vstack([V.T, np.ones(d + 1)])
    alpha = np.linalg.solve(A, np.append(np.asarray(p, dtype=np.float64), 1.0))
    return V[int(np.argmax(alpha))].copy()


def simplex_lemma_holds(vertices: np.ndarray, p, tol: float = 1e-12) -> bool:
    V = np.asarray(vertices, dtype=np.float64)
    d = V.shape[1]
    r = simplex_lemma_direction(V, p)
    hits = np.count_nonzero(V @ r <= np.dot(p, r) - 1.0 / d + tol)
    return hits >= d


def project_instance(inst: AdversarialInstance, w) -> tuple[np.ndarray, np.ndarray]:
    """Project both sets along ``w`` and express them in a basis of ``w``'s
    orthogonal complement (``d`` coordinates)."""
    u = UnitVector.from_vector(w)
    B = orthonormal_complement(u)
    return project_along(inst.P, u) @ B, project_along(inst.Q, u) @ B


def certificate_errors(inst: AdversarialInstance, w) -> int:
    """Errors of the explicit hyperplane used in the optimality argument."""
    u = UnitVector.from_vector(w).coords
    Pw = project_along(inst.P, u)
    Qw = project_along(inst.Q, u)
    qw = project_along(inst.center, u)
    x = qw[: inst.d]
    r = simplex_lemma_direction(inst.vertices, x)
    R = np.append(r, 0.0)
    thr = qw @ R - inst.eps
    err_p = int(np.count_nonzero(Pw @ R >= thr))
    err_q = int(np.count_nonzero(Qw @ R <= thr))
    return err_p + err_q


def oracle_errors(inst: AdversarialInstance, w) -> int:
    """Misclassifications of the best linear classifier after projecting along ``w``."""
    Pd, Qd = project_instance(inst, w)
    return best_linear_classifier(Pd, Qd).errors
