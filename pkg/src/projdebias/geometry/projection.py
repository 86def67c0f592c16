"""Projection along unit vectors and their composition."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from projdebias.errors import DegenerateDirectionError

UNIT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class UnitVector:
    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=np.float64).reshape(-1)
        if abs(np.linalg.norm(c) - 1.0) >= UNIT_TOL:
            raise ValueError(f"not a unit vector (norm {np.linalg.norm(c)!r})")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @classmethod
    def from_vector(cls, v, tol: float = 0.0) -> "UnitVector":
        """Normalise ``v``; raises if its norm is at most ``tol``."""
        v = np.asarray(v, dtype=np.float64).reshape(-1)
        norm = np.linalg.norm(v)
        if not np.isfinite(norm) or norm <= tol:
            raise DegenerateDirectionError("cannot normalise a zero-length direction")
        u = v / norm
        # one Newton step keeps |norm - 1| well under UNIT_TOL
        u = u / np.linalg.norm(u)
        return cls(u)

    @property
    def dim(self) -> int:
        return self.coords.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype)


def _as_unit(w) -> np.ndarray:
    if isinstance(w, UnitVector):
        return w.coords
    w = np.asarray(w, dtype=np.float64).reshape(-1)
    if abs(np.linalg.norm(w) - 1.0) > 1e-9:
        raise ValueError("projection direction must be a unit vector")
    return w


def project_along(points, w) -> np.ndarray:
    """Remove the component along ``w``: ``p - (p . w) w`` for every row."""
    u = _as_unit(w)
    pts = np.asarray(points, dtype=np.float64)
    if pts.shape[-1] != u.shape[0]:
        raise ValueError(f"points have dimension {pts.shape[-1]}, direction has {u.shape[0]}")
    return pts - np.multiply.outer(pts @ u, u)


def projection_matrix(directions: Iterable) -> np.ndarray:
    """Composed matrix ``M`` with ``X @ M`` equal to sequential projection.

    ``M = (I - w1 w1^T)(I - w2 w2^T)...`` for row-vector data, in step order.
    """
    dirs = [_as_unit(w) for w in directions]
    if not dirs:
        raise ValueError("need at least one direction to infer the dimension")
    d = dirs[0].shape[0]
    m = np.eye(d)
    for u in dirs:
        m = m - np.outer(m @ u, u)
    return m


def orthonormal_complement(w) -> np.ndarray:
    """``d x (d-1)`` matrix whose columns span the hyperplane orthogonal to ``w``."""
    u = _as_unit(w)
    q, _ = np.linalg.qr(np.column_stack([u, np.eye(u.shape[0])]))
    return q[:, 1 : u.shape[0]]
