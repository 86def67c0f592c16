"""Iterative nullspace projection: train a linear probe, project out its
weight directions, repeat until the probe is no better than the majority
baseline."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from projdebias.debias.pipeline import ProjectionPipeline, ProjectionStep
from projdebias.debias.strategies import as_points
from projdebias.errors import DataError
from projdebias.geometry.projection import UnitVector, project_along
from projdebias.probes.linear import majority_rate, train_linear

logger = logging.getLogger(__name__)

ORTHO_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class InlpResult:
    """``dev_accuracy[i]`` is the held-out probe accuracy after ``i`` rounds."""

    pipeline: ProjectionPipeline
    dev_accuracy: list = field(default_factory=list)
    majority_rate: float = 0.0
    rounds: int = 0
    guarded: bool = False

    def series(self) -> list:
        return [(i, a) for i, a in enumerate(self.dev_accuracy)]


def _orthonormalize(v, basis):
    for b in basis:
        v = v - (v @ b) * b
    n = np.linalg.norm(v)
    return None if n <= ORTHO_TOL else v / n


def inlp_run(
    data,
    dataset,
    trainer: str = "hinge",
    max_iters: int = 35,
    stop_margin: float = 0.02,
    eval_split: str = "dev",
    labels=None,
    orthogonalize: bool = False,
    pre_check: bool = False,
    seed: int = 0,
    trainer_params: dict | None = None,
    source_space: str = "",
) -> InlpResult:
    """Run up to ``max_iters`` rounds on ``dataset``'s train split.

    Each round trains on the already-projected train rows and projects along
    every weight row of the probe (one row for two classes, one per class
    otherwise), the rows of one round made orthonormal to each other. With
    ``orthogonalize`` they are also made orthogonal to all earlier steps.
    A round is followed by a fresh probe scored on ``eval_split``; the loop
    stops once that score is at most majority + ``stop_margin``. With
    ``pre_check`` the check also runs before the first round.
    """
    if max_iters < 0:
        raise ValueError("max_iters must be >= 0")
    X = as_points(data)
    params = dict(trainer_params or {})
    tr_idx, tr_y = dataset.arrays("train", labels)
    ev_idx, ev_y = dataset.arrays(eval_split, labels)
    if tr_idx.size == 0 or ev_idx.size == 0:
        raise DataError(f"empty train or {eval_split} split")
    if np.unique(tr_y).size < 2:
        raise DataError("train split has fewer than two classes")
    rows = np.concatenate([tr_idx, ev_idx])
    Z = np.array(X[rows], dtype=np.float64)
    ntr = tr_idx.size
    base = majority_rate(ev_y)

    def fit(round_no):
        probe = train_linear(Z[:ntr], tr_y, trainer=trainer, seed=seed + round_no, **params)
        return probe, probe.accuracy(Z[ntr:], ev_y)

    probe, acc = fit(0)
    series = [acc]
    steps, warnings, basis = [], [], []
    if pre_check and acc <= base + stop_margin:
        pipe = ProjectionPipeline((), source_space, X.shape[1])
        return InlpResult(pipe, series, base, 0, True)

    rounds = 0
    for r in range(max_iters):
        round_basis = []
        train_acc = probe.accuracy(Z[:ntr], tr_y)
        for row, cls in zip(probe.directions, probe.classes if probe.directions.shape[0] > 1 else [None]):
            v = _orthonormalize(np.asarray(row, dtype=np.float64), (basis if orthogonalize else []) + round_basis)
            if v is None:
                msg = f"round {r}: weight row for class {cls} is degenerate; skipped"
                logger.warning(msg)
                warnings.append(msg)
                continue
            w = UnitVector.from_vector(v)
            meta = {"round": r, "dev_accuracy_before": acc, "train_accuracy": train_acc}
            if cls is not None:
                meta["one_vs_rest_class"] = cls
            steps.append(ProjectionStep(w, "INLP", r, meta))
            round_basis.append(w.coords)
            Z = project_along(Z, w)
        basis.extend(round_basis)
        rounds += 1
        probe, acc = fit(r + 1)
        series.append(acc)
        if acc <= base + stop_margin:
            break
    pipe = ProjectionPipeline(tuple(steps), source_space, X.shape[1], tuple(warnings))
    return InlpResult(pipe, series, base, rounds, series[-1] <= base + stop_margin)
