"""Labeled attribute datasets built from seed-direction similarity."""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from projdebias.embeddings import EmbeddingSpace
from projdebias.errors import DataError

logger = logging.getLogger(__name__)

MINUS = "minus"
PLUS = "plus"
NEUTRAL = "neutral"
SPLITS = ("train", "dev", "test")


@dataclass(frozen=True)
class AttributeClass:
    label: str
    indices: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))


@dataclass(frozen=True)
class LabeledPointSet:
    """Disjoint attribute classes over one embedding space, plus a split map.

    ``splits`` maps a row index to ``"train"``, ``"dev"`` or ``"test"``; it is
    empty until :func:`split` has been applied.
    """

    space_name: str
    classes: tuple[AttributeClass, ...]
    splits: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))
        object.__setattr__(self, "splits", {int(k): v for k, v in self.splits.items()})
        seen: set[int] = set()
        labels = set()
        for c in self.classes:
            if c.label in labels:
                raise DataError(f"duplicate class label {c.label!r}")
            labels.add(c.label)
            overlap = seen.intersection(c.indices)
            if overlap:
                raise DataError(f"class {c.label!r} overlaps another class at {sorted(overlap)[:5]}")
            seen.update(c.indices)
        if self.splits:
            if set(self.splits) != seen:
                raise DataError("split map must cover exactly the labeled indices")
            bad = set(self.splits.values()) - set(SPLITS)
            if bad:
                raise DataError(f"unknown split name(s) {sorted(bad)}")

    @property
    def labels(self) -> list[str]:
        return [c.label for c in self.classes]

    def class_of(self, label: str) -> AttributeClass:
        for c in self.classes:
            if c.label == label:
                return c
        raise KeyError(label)

    def labeled_indices(self) -> np.ndarray:
        return np.array(sorted(i for c in self.classes for i in c.indices), dtype=np.intp)

    def arrays(self, split: str | None = None, labels: Sequence[str] | None = None):
        """Row indices and integer class ids (position in ``labels``).

        Restricted to one split when ``split`` is given and to the listed
        classes when ``labels`` is given.
        """
        labels = list(labels) if labels is not None else self.labels
        idx, y = [], []
        for code, label in enumerate(labels):
            for i in self.class_of(label).indices:
                if split is not None:
                    if not self.splits:
                        raise DataError("dataset has no split assignment")
                    if self.splits[i] != split:
                        continue
                idx.append(i)
                y.append(code)
        idx = np.asarray(idx, dtype=np.intp)
        y = np.asarray(y, dtype=np.intp)
        order = np.argsort(idx, kind="stable")
        return idx[order], y[order]

    def restrict_labels(self, labels: Sequence[str]) -> "LabeledPointSet":
        keep = [self.class_of(lab) for lab in labels]
        kept = {i for c in keep for i in c.indices}
        splits = {i: s for i, s in self.splits.items() if i in kept}
        return LabeledPointSet(self.space_name, keep, splits)

    def split_counts(self) -> dict:
        out = {}
        for c in self.classes:
            counts = {s: 0 for s in SPLITS}
            for i in c.indices:
                if i in self.splits:
                    counts[self.splits[i]] += 1
            out[c.label] = counts
        return out

    def to_json(self, space: EmbeddingSpace) -> dict:
        return {
            "space": self.space_name,
            "classes": [
                {"label": c.label, "tokens": [space.vocab[i] for i in c.indices]}
                for c in self.classes
            ],
            "splits": {space.vocab[i]: s for i, s in sorted(self.splits.items())},
        }

    @classmethod
    def from_json(cls, data: dict, space: EmbeddingSpace) -> "LabeledPointSet":
        classes = [
            AttributeClass(c["label"], space.indices(c["tokens"])) for c in data["classes"]
        ]
        splits = {space.index(tok): s for tok, s in data.get("splits", {}).items()}
        return cls(data.get("space", space.name), classes, splits)

    def save(self, path, space: EmbeddingSpace) -> None:
        with open(os.fspath(path), "w", encoding="utf-8") as fh:
            json.dump(self.to_json(space), fh, indent=1)

    @classmethod
    def load(cls, path, space: EmbeddingSpace) -> "LabeledPointSet":
        with open(os.fspath(path), encoding="utf-8") as fh:
            return cls.from_json(json.load(fh), space)


def seed_direction(space: EmbeddingSpace, positive: str, negative: str) -> np.ndarray:
    """``vec(positive) - vec(negative)``, unnormalised (e.g. he - she)."""
    direction = space.vector(positive) - space.vector(negative)
    if not np.any(direction):
        logger.warning("seed direction %s - %s is the zero vector", positive, negative)
    return np.array(direction)


def _cosines_to(unit_rows: np.ndarray, direction: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(direction)
    if norm == 0:
        return np.zeros(unit_rows.shape[0])
    return unit_rows @ (np.asarray(direction, dtype=np.float64) / norm)


def _ranked(scores: np.ndarray, banned: set) -> np.ndarray:
    order = np.lexsort((np.arange(scores.size), -scores))
    if not banned:
        return order
    return np.array([i for i in order if i not in banned], dtype=np.intp)


def _disjoint_topk(cos_plus, cos_minus, k):
    """Top-k sets for both directions; shared tokens go to the higher cosine."""
    banned_plus: set[int] = set()
    banned_minus: set[int] = set()
    while True:
        plus = _ranked(cos_plus, banned_plus)[:k]
        minus = _ranked(cos_minus, banned_minus)[:k]
        shared = set(plus.tolist()) & set(minus.tolist())
        if not shared:
            return plus, minus
        for t in shared:
            if cos_plus[t] >= cos_minus[t]:
                banned_minus.add(t)
            else:
                banned_plus.add(t)


def build_bias_dataset(
    space: EmbeddingSpace,
    dir_plus: np.ndarray,
    dir_minus: np.ndarray,
    k: int,
    neutral_k: int,
    neutral_threshold: float = 0.3,
    rng_seed: int = 0,
    absolute: bool = False,
    labels: tuple[str, str, str] = (PLUS, MINUS, NEUTRAL),
) -> LabeledPointSet:
    """PLUS/MINUS = top-``k`` rows by cosine to each direction; NEUTRAL = a
    seeded uniform sample of the remaining rows whose cosine to ``dir_plus``
    is below ``neutral_threshold`` (``|cosine|`` when ``absolute``).

    ``neutral_k=0`` yields a two-class dataset.
    """
    if k < 0 or neutral_k < 0:
        raise DataError("class sizes must be non-negative")
    if 2 * k + neutral_k > space.n:
        raise DataError(f"2*k + neutral_k = {2 * k + neutral_k} exceeds n = {space.n}")
    if not 0 < neutral_threshold <= 1:
        raise DataError("neutral_threshold must lie in (0, 1]")
    unit = space.unit_rows()
    cos_plus = _cosines_to(unit, dir_plus)
    cos_minus = _cosines_to(unit, dir_minus)
    plus, minus = _disjoint_topk(cos_plus, cos_minus, k)

    taken = np.zeros(space.n, dtype=bool)
    taken[plus] = True
    taken[minus] = True
    score = np.abs(cos_plus) if absolute else cos_plus
    candidates = np.flatnonzero(~taken & (score < neutral_threshold))
    if candidates.size < neutral_k:
        raise DataError(
            f"only {candidates.size} neutral candidates below threshold {neutral_threshold}, "
            f"need {neutral_k}"
        )
    rng = np.random.default_rng(rng_seed)
    neutral = np.sort(rng.choice(candidates, size=neutral_k, replace=False))

    plus_label, minus_label, neutral_label = labels
    classes = [
        AttributeClass(plus_label, np.sort(plus)),
        AttributeClass(minus_label, np.sort(minus)),
    ]
    if neutral_k:
        classes.append(AttributeClass(neutral_label, neutral))
    return LabeledPointSet(space.name, classes)


def _largest_remainder(total: int, fractions: np.ndarray) -> np.ndarray:
    quotas = total * fractions
    counts = np.floor(quotas).astype(int)
    short = total - counts.sum()
    order = np.lexsort((np.arange(len(quotas)), -(quotas - counts)))
    counts[order[:short]] += 1
    return counts


def _controlled_rounding(class_sizes: np.ndarray, fractions: np.ndarray) -> np.ndarray:
    """Integer table with row sums ``class_sizes``, column sums apportioned from
    the grand total, and each cell the floor or ceiling of its quota."""
    quotas = np.outer(class_sizes, fractions)
    table = np.floor(quotas + 1e-12).astype(int)
    frac = quotas - table
    col_target = _largest_remainder(int(class_sizes.sum()), fractions)
    row_need = class_sizes - table.sum(axis=1)
    col_need = col_target - table.sum(axis=0)

    # unit-capacity bipartite flow (rows -> columns), augmenting paths by DFS
    n_rows, n_cols = table.shape
    usable = frac > 1e-12
    flow = np.zeros_like(table)

    def augment(row, seen_cols):
        cols = sorted(range(n_cols), key=lambda s: -frac[row, s])
        for s in cols:
            if not usable[row, s] or flow[row, s] or s in seen_cols:
                continue
            seen_cols.add(s)
            if col_need[s] > flow[:, s].sum():
                flow[row, s] = 1
                return True
            for other in range(n_rows):
                if flow[other, s] and augment_from(other, s, seen_cols):
                    flow[row, s] = 1
                    return True
        return False

    def augment_from(other, freed_col, seen_cols):
        flow[other, freed_col] = 0
        if augment(other, seen_cols):
            return True
        flow[other, freed_col] = 1
        return False

    for row in range(n_rows):
        for _ in range(int(row_need[row])):
            if not augment(row, set()):
                raise DataError("could not apportion split sizes")
    return table + flow


def split(
    dataset: LabeledPointSet,
    fractions: Sequence[float] = (0.65, 0.10, 0.25),
    rng_seed: int = 0,
) -> LabeledPointSet:
    """Stratified, seeded train/dev/test assignment.

    Split totals follow largest-remainder apportionment of the labeled
    count; every per-class count is the floor or ceiling of its exact share.
    """
    fr = np.asarray(fractions, dtype=np.float64)
    if fr.shape != (3,) or np.any(fr < 0):
        raise DataError("fractions must be three non-negative numbers")
    if abs(fr.sum() - 1.0) > 1e-9:
        raise DataError(f"fractions sum to {fr.sum()}, expected 1")
    sizes = np.array([len(c.indices) for c in dataset.classes], dtype=int)
    table = _controlled_rounding(sizes, fr)
    rng = np.random.default_rng(rng_seed)
    assignment = {}
    for c, counts in zip(dataset.classes, table):
        perm = rng.permutation(np.asarray(c.indices, dtype=np.intp))
        bounds = np.cumsum(counts)
        for pos, i in enumerate(perm):
            assignment[int(i)] = SPLITS[int(np.searchsorted(bounds, pos, side="right"))]
    return LabeledPointSet(dataset.space_name, dataset.classes, assignment)
