"""Exact best linear classifier (minimum misclassifications) on small sets."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

REL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class LinearSplit:
    """Halfplane classifier: predicts PLUS iff ``normal . x >= offset``."""

    errors: int
    normal: np.ndarray
    offset: float

    def predict_plus(self, X) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.normal >= self.offset

    def count_errors(self, Pminus, Pplus) -> int:
        return int(
            np.count_nonzero(self.predict_plus(Pminus))
            + np.count_nonzero(~self.predict_plus(Pplus))
        )


def _stack(Pminus, Pplus, dim=None):
    A = np.asarray(Pminus, dtype=np.float64).reshape(-1, dim or np.shape(Pminus)[-1])
    B = np.asarray(Pplus, dtype=np.float64).reshape(-1, A.shape[1])
    X = np.vstack([A, B])
    y = np.concatenate([np.zeros(len(A), dtype=bool), np.ones(len(B), dtype=bool)])
    return X, y


def _constant_split(X, y, d) -> LinearSplit:
    n_plus = int(y.sum())
    n_minus = int((~y).sum())
    normal = np.zeros(d)
    normal[0] = 1.0
    scale = float(np.max(np.abs(X))) + 1.0 if X.size else 1.0
    if n_plus >= n_minus:  # everything PLUS
        return LinearSplit(n_minus, normal, -10 * scale)
    return LinearSplit(n_plus, normal, 10 * scale)


def best_linear_classifier_2d(Pminus, Pplus) -> LinearSplit:
    """Fewest misclassifications of any halfplane classifier (both orientations).

    Enumerates lines through two distinct points. Points strictly off the line
    keep their side; collinear points can be split at any gap between
    distinct positions along the line, each part going to either side, which
    is what an infinitesimal rotation about a pivot on the line achieves.
    The all-one-class classifiers are included. Degenerate (collinear,
    coincident) inputs are handled exactly up to a relative tolerance.
    """
    X, y = _stack(Pminus, Pplus, 2)
    best = _constant_split(X, y, 2)
    n = X.shape[0]
    if n < 2:
        return best
    scale = max(1.0, float(np.max(np.abs(X))))
    tol = REL_TOL * scale
    i, j = np.triu_indices(n, k=1)
    E = X[j] - X[i]
    lengths = np.linalg.norm(E, axis=1)
    keep = lengths > tol
    i, j, E, lengths = i[keep], j[keep], E[keep], lengths[keep]
    if i.size == 0:
        return best
    E = E / lengths[:, None]
    N = np.column_stack([-E[:, 1], E[:, 0]])
    rel = X[None, :, :] - X[i][:, None, :]  # (pairs, n, 2)
    s = np.einsum("pnc,pc->pn", rel, N)  # signed distance
    t = np.einsum("pnc,pc->pn", rel, E)  # position along the line
    on = np.abs(s) <= tol
    above = s > tol
    below = s < -tol
    yp = y[None, :]
    # orientation +1: above -> PLUS; orientation -1: above -> MINUS
    err_pos = np.sum(above & ~yp, axis=1) + np.sum(below & yp, axis=1)
    err_neg = np.sum(above & yp, axis=1) + np.sum(below & ~yp, axis=1)
    strict = np.minimum(err_pos, err_neg)

    # collinear points: best prefix/suffix split along t at a distinct gap
    tt = np.where(on, t, np.inf)
    order = np.argsort(tt, axis=1, kind="stable")
    ts = np.take_along_axis(tt, order, axis=1)
    ys = np.take_along_axis(np.broadcast_to(yp, tt.shape), order, axis=1)
    os_ = np.take_along_axis(on, order, axis=1)
    cm = np.concatenate([np.zeros((len(i), 1), int), np.cumsum(os_ & ~ys, axis=1)], axis=1)
    cp = np.concatenate([np.zeros((len(i), 1), int), np.cumsum(os_ & ys, axis=1)], axis=1)
    tot_m = cm[:, -1:]
    tot_p = cp[:, -1:]
    # prefix PLUS / suffix MINUS, or the reverse
    err_a = (cm) + (tot_p - cp)
    err_b = (cp) + (tot_m - cm)
    gap_ok = np.ones_like(cm, dtype=bool)
    gap_ok[:, 1:-1] = ~(ts[:, 1:] <= ts[:, :-1] + tol)
    err_a = np.where(gap_ok, err_a, n + 1)
    err_b = np.where(gap_ok, err_b, n + 1)
    online = np.minimum(err_a.min(axis=1), err_b.min(axis=1))
    total = strict + online
    p = int(np.argmin(total))
    if total[p] >= best.errors:
        return best

    # realise the chosen pair/split as a concrete (normal, offset)
    k_a, k_b = int(np.argmin(err_a[p])), int(np.argmin(err_b[p]))
    prefix_plus = err_a[p, k_a] <= err_b[p, k_b]
    k = k_a if prefix_plus else k_b
    orient = 1.0 if err_pos[p] <= err_neg[p] else -1.0
    origin = X[i[p]]
    line_t = ts[p][np.isfinite(ts[p])]
    if k == 0:
        pivot_t = line_t[0] - 1.0
    elif k >= line_t.size:
        pivot_t = line_t[-1] + 1.0
    else:
        pivot_t = 0.5 * (line_t[k - 1] + line_t[k])
    pivot = origin + pivot_t * E[p]
    off_line = ~on[p]
    dmin = float(np.min(np.abs(s[p][off_line]))) if off_line.any() else 1.0
    reach = float(np.max(np.linalg.norm(X - pivot, axis=1))) + 1.0
    delta = 0.25 * dmin / reach
    # tilt the oriented normal by gamma * e: a collinear point at position t
    # then scores gamma * (t - pivot_t), so gamma < 0 sends the prefix to PLUS
    gamma = -delta if prefix_plus else delta
    normal = orient * N[p] + gamma * E[p]
    normal = normal / np.linalg.norm(normal)
    split = LinearSplit(int(total[p]), normal, float(normal @ pivot))
    return split


def best_linear_classifier(Pminus, Pplus, max_subsets: int = 2_000_000) -> LinearSplit:
    """Fewest misclassifications of any hyperplane classifier in ``R^d``.

    Planar input goes to :func:`best_linear_classifier_2d`. For ``d >= 3`` the
    hyperplanes through every ``d``-subset of points are enumerated; the
    ``d`` defining points can each be pushed to their correct side, while any
    further point lying on the hyperplane is counted as misclassified. The
    result is exact for points in general position and an upper bound on
    the optimum otherwise. ``errors`` is the enumerated count; the returned
    hyperplane is nudged off its defining points and realises it for points
    in general position.
    """
    X, y = _stack(Pminus, Pplus)
    n, d = X.shape
    if d == 1:
        X2 = np.column_stack([X, np.zeros(n)])
        return best_linear_classifier_2d(X2[~y], X2[y])
    if d == 2:
        return best_linear_classifier_2d(X[~y], X[y])
    best = _constant_split(X, y, d)
    if n < d:
        return best
    subsets = np.array(list(itertools.combinations(range(n), d)), dtype=np.intp)
    if subsets.shape[0] > max_subsets:
        raise ValueError(f"{subsets.shape[0]} hyperplanes exceeds max_subsets={max_subsets}")
    tol = REL_TOL * max(1.0, float(np.max(np.abs(X))))
    base = X[subsets[:, 0]]
    spans = X[subsets[:, 1:]] - base[:, None, :]  # (s, d-1, d)
    if d == 3:
        normals = np.cross(spans[:, 0], spans[:, 1])
    else:
        _, _, vt = np.linalg.svd(spans)
        normals = vt[:, -1, :]
    lengths = np.linalg.norm(normals, axis=1)
    keep = lengths > tol
    subsets, base, normals = subsets[keep], base[keep], normals[keep] / lengths[keep, None]
    if subsets.shape[0] == 0:
        return best
    s = np.einsum("snc,sc->sn", X[None, :, :] - base[:, None, :], normals)
    member = np.zeros(s.shape, dtype=bool)
    np.put_along_axis(member, subsets, True, axis=1)
    on_extra = (np.abs(s) <= tol) & ~member
    above = (s > tol) & ~member
    below = (s < -tol) & ~member
    yp = y[None, :]
    err_pos = np.sum(above & ~yp, axis=1) + np.sum(below & yp, axis=1)
    err_neg = np.sum(above & yp, axis=1) + np.sum(below & ~yp, axis=1)
    total = np.minimum(err_pos, err_neg) + on_extra.sum(axis=1)
    p = int(np.argmin(total))
    if total[p] >= best.errors:
        return best
    orient = 1.0 if err_pos[p] <= err_neg[p] else -1.0
    normal = orient * normals[p]
    offset = float(normal @ base[p])
    # nudge (normal, offset) so each defining point lands on its own side
    pts = X[subsets[p]]
    want = np.where(y[subsets[p]], 1.0, -1.0)
    A = np.column_stack([pts, -np.ones(d)])
    z = np.linalg.lstsq(A, want, rcond=None)[0]
    strict = ~member[p] & ~on_extra[p]
    dmin = float(np.min(np.abs(s[p][strict]))) if strict.any() else 1.0
    reach = float(np.max(np.linalg.norm(X, axis=1))) + 1.0
    eps = 0.25 * dmin / (np.linalg.norm(z) * reach + 1e-300)
    split = LinearSplit(int(total[p]), normal + eps * z[:d], offset + eps * z[d])
    return split
