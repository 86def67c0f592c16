"""Probe accuracy as a pipeline is applied one step at a time."""

from __future__ import annotations

import numpy as np

from projdebias.debias.strategies import as_points
from projdebias.errors import DataError
from projdebias.probes.linear import evaluate_probe, majority_rate, train_linear


def guarding_curve(
    space,
    dataset,
    pipeline,
    trainer: str = "hinge",
    split: str = "dev",
    labels=None,
    seed: int = 0,
    trainer_params: dict | None = None,
) -> list[tuple[int, float]]:
    """``(i, accuracy)`` for ``i = 0 .. len(pipeline)``.

    Point ``i`` trains a fresh probe on the train split after the first ``i``
    steps and scores it on ``split``.
    """
    X = as_points(space)
    tr_idx, tr_y = dataset.arrays("train", labels)
    ev_idx, ev_y = dataset.arrays(split, labels)
    if tr_idx.size == 0 or ev_idx.size == 0:
        raise DataError(f"empty train or {split} split")
    Z = np.array(X[np.concatenate([tr_idx, ev_idx])], dtype=np.float64)
    n = tr_idx.size
    params = dict(trainer_params or {})
    curve = []
    for i in range(len(pipeline) + 1):
        if i:
            Z = pipeline.steps[i - 1].apply(Z)
        probe = train_linear(Z[:n], tr_y, trainer=trainer, seed=seed, **params)
        curve.append((i, probe.accuracy(Z[n:], ev_y)))
    return curve


def probe_report(space, dataset, trainer="hinge", split="dev", labels=None, seed=0, trainer_params=None):
    X = as_points(space)
    tr_idx, tr_y = dataset.arrays("train", labels)
    ev_idx, ev_y = dataset.arrays(split, labels)
    probe = train_linear(X[tr_idx], tr_y, trainer=trainer, seed=seed, **dict(trainer_params or {}))
    return evaluate_probe(probe, X[ev_idx], ev_y, split)


def is_guarded(accuracy: float, y_eval, margin: float) -> bool:
    """The operational guarding predicate: accuracy <= majority + margin."""
    return accuracy <= majority_rate(y_eval) + margin
