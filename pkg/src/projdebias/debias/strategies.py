"""Single-direction strategies: mean difference, Tukey-median difference,
and covariance-weighted random directions."""

from __future__ import annotations

import logging
from typing import Mapping, Sequence

import numpy as np

from projdebias.debias.pipeline import ProjectionPipeline, ProjectionStep
from projdebias.embeddings import EmbeddingSpace
from projdebias.errors import DataError, DegenerateDirectionError
from projdebias.geometry.projection import UnitVector, project_along
from projdebias.geometry.tukey import tukey_median_approx, tukey_median_exact_2d

logger = logging.getLogger(__name__)

TMP_MODES = ("auto", "exact2d", "approx")


def as_points(data) -> np.ndarray:
    if isinstance(data, EmbeddingSpace):
        return data.matrix
    X = np.asarray(data, dtype=np.float64)
    if X.ndim != 2:
        raise DataError(f"expected an (n, d) point array, got shape {X.shape}")
    return X


def _rows(X, idx, what):
    idx = np.asarray(idx, dtype=np.intp).reshape(-1)
    if idx.size == 0:
        raise DataError(f"{what} is empty")
    return X[idx]


def _direction(diff, scale, what) -> UnitVector:
    if np.linalg.norm(diff) <= 1e-12 * max(1.0, scale):
        raise DegenerateDirectionError(f"{what} coincide; no projection direction")
    return UnitVector.from_vector(diff)


def mp_step(data, Pminus, Pplus, iteration: int = 0) -> ProjectionStep:
    """Project along ``normalize(mean(P+) - mean(P-))``."""
    X = as_points(data)
    A = _rows(X, Pminus, "Pminus")
    B = _rows(X, Pplus, "Pplus")
    mu_minus, mu_plus = A.mean(axis=0), B.mean(axis=0)
    scale = float(max(np.abs(mu_minus).max(), np.abs(mu_plus).max()))
    w = _direction(mu_plus - mu_minus, scale, "class means")
    return ProjectionStep(w, "MP", iteration, {"mean_distance": float(np.linalg.norm(mu_plus - mu_minus))})


def _class_map(classes) -> dict:
    if hasattr(classes, "classes"):  # LabeledPointSet
        return {c.label: np.asarray(c.indices, dtype=np.intp) for c in classes.classes}
    return {k: np.asarray(v, dtype=np.intp) for k, v in dict(classes).items()}


def mp_multiclass(
    data,
    classes: Mapping,
    anchor=None,
    recompute_means: bool = True,
    source_space: str = "",
) -> ProjectionPipeline:
    """``k - 1`` mean projections, each pairing the anchor with one other class.

    With ``recompute_means`` (default) every direction is computed on the
    data as already projected by the previous steps, which makes all class
    means coincide at the end. Without it all directions come from the
    original space. Degenerate directions are skipped and listed in
    ``warnings``.
    """
    X = as_points(data)
    cmap = _class_map(classes)
    if len(cmap) < 2:
        raise DataError("need at least two classes")
    labels = list(cmap)
    anchor = labels[0] if anchor is None else anchor
    if anchor not in cmap:
        raise DataError(f"anchor {anchor!r} is not a class label")
    others = [lab for lab in labels if lab != anchor]
    current = np.array(X, dtype=np.float64)
    steps, warnings = [], []
    for it, other in enumerate(others):
        base = current if recompute_means else X
        try:
            step = mp_step(base, cmap[anchor], cmap[other], iteration=it)
        except DegenerateDirectionError:
            msg = f"step {it}: means of {anchor!r} and {other!r} coincide; skipped"
            logger.warning(msg)
            warnings.append(msg)
            continue
        md = dict(step.metadata, anchor=str(anchor), other=str(other), recompute_means=recompute_means)
        step = ProjectionStep(step.w, "MP", it, md)
        steps.append(step)
        current = step.apply(current)
    return ProjectionPipeline(tuple(steps), source_space, X.shape[1], tuple(warnings))


def tmp_step(
    data,
    Pminus,
    Pplus,
    mode: str = "auto",
    rng_seed=0,
    iterations: int = 200,
    iteration: int = 0,
) -> ProjectionStep:
    """Project along ``normalize(tau+ - tau-)``, the difference of the two
    classes' Tukey medians.

    ``exact2d`` requires planar data; ``approx`` uses the sampled-direction
    hill climb in any dimension; ``auto`` picks exact in 2D.
    """
    if mode not in TMP_MODES:
        raise ValueError(f"mode must be one of {TMP_MODES}")
    X = as_points(data)
    A = _rows(X, Pminus, "Pminus")
    B = _rows(X, Pplus, "Pplus")
    if mode == "auto":
        mode = "exact2d" if X.shape[1] == 2 else "approx"
    if mode == "exact2d":
        if X.shape[1] != 2:
            raise DataError("exact2d Tukey medians need planar data")
        tm, tp = tukey_median_exact_2d(A), tukey_median_exact_2d(B)
    else:
        tm = tukey_median_approx(A, rng_seed=rng_seed, iterations=iterations)
        tp = tukey_median_approx(B, rng_seed=rng_seed, iterations=iterations)
    scale = float(np.abs(np.vstack([tm.point, tp.point])).max())
    w = _direction(tp.point - tm.point, scale, "Tukey medians")
    meta = {
        "mode": mode,
        "depth_minus": tm.depth,
        "depth_plus": tp.depth,
        "n_minus": int(A.shape[0]),
        "n_plus": int(B.shape[0]),
        "median_minus": tm.point,
        "median_plus": tp.point,
    }
    return ProjectionStep(w, "TMP", iteration, meta)


def covariance(X) -> np.ndarray:
    X = as_points(X)
    Xc = X - X.mean(axis=0)
    return Xc.T @ Xc / max(1, X.shape[0] - 1)


def _random_from_cov(cov, rng):
    lam, U = np.linalg.eigh(cov)
    lam = np.clip(lam, 0.0, None)
    v = U @ (np.sqrt(lam) * rng.standard_normal(lam.size))
    return _direction(v, float(np.sqrt(lam.max())) if lam.size else 0.0, "random draw and origin")


def random_step(data, rng_seed=0, iteration: int = 0) -> ProjectionStep:
    """Direction drawn from a Gaussian with the data's covariance:
    ``normalize(sum_i sqrt(lambda_i) g_i u_i)``.

    ``rng_seed`` may be an int or a ``numpy.random.Generator``.
    """
    rng = np.random.default_rng(rng_seed)
    return ProjectionStep(_random_from_cov(covariance(data), rng), "RANDOM", iteration)


def random_pipeline(data, count: int, rng_seed=0, start_iteration: int = 0, source_space: str = "") -> ProjectionPipeline:
    """``count`` successive random steps, each drawn from the covariance of
    the data as projected by the previous ones.

    Projection is linear, so the covariance is updated as
    ``(I - w w^T) C (I - w w^T)`` instead of re-projecting every row.
    """
    X = as_points(data)
    rng = np.random.default_rng(rng_seed)
    cov = covariance(X)
    steps = []
    for i in range(count):
        w = _random_from_cov(cov, rng)
        steps.append(ProjectionStep(w, "RANDOM", start_iteration + i))
        cw = cov @ w.coords
        cov = cov - np.outer(cw, w.coords) - np.outer(w.coords, cw) + (w.coords @ cw) * np.outer(w.coords, w.coords)
    return ProjectionPipeline(tuple(steps), source_space, X.shape[1])


def project(data, step: ProjectionStep) -> np.ndarray:
    return project_along(as_points(data), step.w)
