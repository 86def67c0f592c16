"""Tukey depth and Tukey median.

Exact routines are planar (closed halfplanes, ties resolved by evaluating
both infinitesimal rotations of every critical direction). In higher
dimensions depth is approximated by the minimum over sampled directions,
which is always an upper bound on the true depth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from projdebias.geometry.projection import UnitVector

REL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DepthResult:
    point: np.ndarray
    depth: int
    witness_direction: UnitVector

    def halfspace_count(self, points) -> int:
        """Points of ``points`` in the closed witness halfspace through ``point``."""
        pts = np.asarray(points, dtype=np.float64)
        return int(np.count_nonzero((pts - self.point) @ self.witness_direction.coords >= 0))


def _check_2d(P):
    P = np.asarray(P, dtype=np.float64)
    if P.ndim != 2 or P.shape[1] != 2:
        raise ValueError(f"expected an (n, 2) point array, got shape {P.shape}")
    if P.shape[0] < 1:
        raise ValueError("need at least one point")
    return P


def _scale(P) -> float:
    return max(1.0, float(np.max(np.abs(P))))


def _depths_2d(Q: np.ndarray, P: np.ndarray, chunk: int | None = None) -> np.ndarray:
    """Exact planar depth of every row of ``Q`` (vectorised, O(n^2) per query).

    For each point p_j != q the boundary line through q and p_j is rotated
    infinitesimally both ways, on both sides: points strictly on the kept
    side count, and of the points on the line only one of the two rays does.
    """
    n = P.shape[0]
    if chunk is None:
        chunk = max(1, 1_000_000 // max(1, n * n))
    tol = REL_TOL * _scale(np.vstack([P, Q]))
    out = np.empty(Q.shape[0], dtype=np.int64)
    for start in range(0, Q.shape[0], chunk):
        q = Q[start : start + chunk]
        V = P[None, :, :] - q[:, None, :]  # (m, n, 2)
        norms = np.linalg.norm(V, axis=2)
        coincident = norms <= tol
        # cross[m, j, i] = V_j x V_i ; dot[m, j, i] = V_j . V_i
        cross = V[:, :, None, 0] * V[:, None, :, 1] - V[:, :, None, 1] * V[:, None, :, 0]
        dot = np.einsum("mjc,mic->mji", V, V)
        ctol = REL_TOL * norms[:, :, None] * norms[:, None, :] + tol * tol
        valid = ~coincident[:, None, :]
        left = (cross > ctol) & valid
        right = (cross < -ctol) & valid
        on = valid & ~left & ~right
        pos = (on & (dot > 0)).sum(axis=2)
        neg = (on & (dot < 0)).sum(axis=2)
        L = left.sum(axis=2)
        R = right.sum(axis=2)
        cand = np.minimum(np.minimum(L + neg, L + pos), np.minimum(R + neg, R + pos))
        cand = np.where(coincident, n, cand)  # rows for p_j == q are not directions
        out[start : start + chunk] = cand.min(axis=1) + coincident.sum(axis=1)
    return np.minimum(out, n)


def _witness_2d(q: np.ndarray, P: np.ndarray, depth: int) -> UnitVector:
    """A direction whose closed halfplane through ``q`` holds ``depth`` points."""
    V = P - q
    norms = np.linalg.norm(V, axis=1)
    V = V[norms > REL_TOL * _scale(P)]
    if V.shape[0] == 0:
        return UnitVector(np.array([1.0, 0.0]))
    theta = np.arctan2(V[:, 1], V[:, 0])
    crit = np.sort(np.mod(np.concatenate([theta + np.pi / 2, theta - np.pi / 2]), 2 * np.pi))
    nxt = np.append(crit[1:], crit[0] + 2 * np.pi)
    mids = 0.5 * (crit + nxt)
    U = np.column_stack([np.cos(mids), np.sin(mids)])
    counts = ((P - q) @ U.T >= 0).sum(axis=0)
    hit = np.flatnonzero(counts == depth)
    best = hit[0] if hit.size else int(np.argmin(counts))
    return UnitVector.from_vector(U[best])


def tukey_depth_exact_2d(q, P) -> DepthResult:
    P = _check_2d(P)
    q = np.asarray(q, dtype=np.float64).reshape(2)
    depth = int(_depths_2d(q[None, :], P)[0])
    return DepthResult(q, depth, _witness_2d(q, P, depth))


def _upper_bounds(C: np.ndarray, P: np.ndarray, n_dirs: int = 48) -> np.ndarray:
    """Cheap upper bound on the depth of every candidate (fixed directions)."""
    tol = REL_TOL * _scale(P) * 10
    ang = np.arange(n_dirs) * (np.pi / n_dirs)
    U = np.column_stack([np.cos(ang), np.sin(ang)])
    ub = np.full(C.shape[0], P.shape[0], dtype=np.int64)
    for u in U:
        s = np.sort(P @ u)
        c = C @ u
        ge = s.size - np.searchsorted(s, c - tol, side="left")
        le = np.searchsorted(s, c + tol, side="right")
        ub = np.minimum(ub, np.minimum(ge, le))
    return ub


def _line_intersections(P: np.ndarray) -> np.ndarray:
    """Intersection points of all lines through pairs of distinct points."""
    n = P.shape[0]
    i, j = np.triu_indices(n, k=1)
    H = np.column_stack([P, np.ones(n)])
    lines = np.cross(H[i], H[j])
    norms = np.linalg.norm(lines[:, :2], axis=1)
    keep = norms > REL_TOL * _scale(P)
    lines = lines[keep] / norms[keep, None]
    if lines.shape[0] < 2:
        return np.empty((0, 2))
    # drop duplicate lines (three or more collinear points)
    sign = np.where(
        np.abs(lines[:, 0]) > 1e-12, np.sign(lines[:, 0]), np.sign(lines[:, 1])
    )
    canon = np.round(lines * sign[:, None], 9)
    _, first = np.unique(canon, axis=0, return_index=True)
    lines = lines[np.sort(first)]
    a, b = np.triu_indices(lines.shape[0], k=1)
    pts = np.cross(lines[a], lines[b])
    w = pts[:, 2]
    ok = np.abs(w) > 1e-12
    return pts[ok, :2] / w[ok, None]


def tukey_median_exact_2d(P) -> DepthResult:
    """Deepest point of a planar point set.

    Candidates are the points themselves and all intersections of lines
    through two points; every vertex of the deepest region is among them.
    The returned point is the centroid of the deepest candidates.
    """
    P = _check_2d(P)
    n = P.shape[0]
    if n == 1 or np.all(np.abs(P - P[0]) <= REL_TOL * _scale(P)):
        q = P[0].copy()
        return DepthResult(q, n, UnitVector(np.array([1.0, 0.0])))

    C = np.vstack([P, _line_intersections(P)])
    lo, hi = P.min(axis=0), P.max(axis=0)
    pad = REL_TOL * _scale(P) * 10
    C = C[np.all((C >= lo - pad) & (C <= hi + pad), axis=1)]
    # coarse bound, a lower bound from the most promising candidates, then
    # progressively tighter bounds on the shrinking survivor set
    ub = _upper_bounds(C, P, n_dirs=4)
    order = np.argsort(-ub, kind="stable")
    best = int(_depths_2d(C[order[: min(64, order.size)]], P).max())
    C = C[ub >= best]
    for n_dirs in (12, 48):
        C = C[_upper_bounds(C, P, n_dirs=n_dirs) >= best]
    depths = _depths_2d(C, P)
    top = depths.max()
    winners = C[depths == top]
    # the deepest region is convex, so the centroid of its candidate
    # vertices is as deep as they are; unlike any single vertex it moves
    # with the data under reflections
    q = winners.mean(axis=0)
    if _depths_2d(q[None, :], P)[0] < top:
        q = winners[np.lexsort((winners[:, 1], winners[:, 0]))[0]]
    return DepthResult(q.copy(), int(top), _witness_2d(q, P, int(top)))


def _sample_directions(d: int, count: int, rng_seed) -> np.ndarray:
    rng = np.random.default_rng(rng_seed)
    U = rng.standard_normal((count, d))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    return U


def _approx_with_dirs(q, P, U):
    counts = ((P - q) @ U.T >= 0).sum(axis=0)
    k = int(np.argmin(counts))
    return int(counts[k]), k


def tukey_depth_approx(q, P, directions: int = 1000, rng_seed=0) -> int:
    """Minimum closed-halfspace count over ``directions`` random unit normals.

    The sample for ``directions=k`` is a prefix of the sample for any larger
    count under the same seed, so the result never increases with more
    directions.
    """
    if directions < 1:
        raise ValueError("directions must be a positive integer")
    P = np.asarray(P, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    U = _sample_directions(P.shape[1], directions, rng_seed)
    return _approx_with_dirs(q, P, U)[0]


def tukey_median_approx(
    P, rng_seed=0, iterations: int = 200, directions: int | None = None
) -> DepthResult:
    """Hill-climbing approximation of the Tukey median in any dimension.

    Starts at the coordinate-wise median. Each round looks at the current
    witness halfspace (the one holding the fewest points) and tries moving
    toward the centroid of the points outside it and straight away from it;
    a move is kept when the sampled depth does not decrease. The first
    point to reach the best sampled depth is returned, so sideways moves
    across a plateau never drift away from it.
    """
    P = np.asarray(P, dtype=np.float64)
    n, d = P.shape
    if n == 1:
        u = np.zeros(d)
        u[0] = 1.0
        return DepthResult(P[0].copy(), 1, UnitVector(u))
    if directions is None:
        directions = max(256, 64 * d)
    U = _sample_directions(d, directions, rng_seed)
    spread = float(np.median(np.abs(P - np.median(P, axis=0)))) or 1.0

    starts = [np.median(P, axis=0), P.mean(axis=0)]
    best_q, best_depth, best_k = None, -1, 0
    for q in starts:
        depth, k = _approx_with_dirs(q, P, U)
        if depth > best_depth:
            best_q, best_depth, best_k = q, depth, k
        step = 1.0
        for _ in range(iterations):
            u = U[k]
            deep = P[(P - q) @ u < 0]
            moves = [q - step * spread * u]
            if deep.shape[0]:
                moves.append(q + step * (deep.mean(axis=0) - q))
            scored = [(_approx_with_dirs(m, P, U), m) for m in moves]
            (cd, ck), cq = max(scored, key=lambda s: s[0][0])
            if cd > depth:
                q, depth, k = cq, cd, ck
                step = min(1.0, step * 1.25)
                if depth > best_depth:
                    best_q, best_depth, best_k = q, depth, k
            elif cd == depth:
                q, k = cq, ck
                step *= 0.7
            else:
                step *= 0.5
            if step < 1e-6:
                break
    return DepthResult(np.array(best_q), best_depth, UnitVector.from_vector(U[best_k]))


def depth_lower_bound(n: int, d: int) -> int:
    """Guaranteed depth of a Tukey median of ``n`` points in ``R^d``."""
    return math.ceil(n / (d + 1))
