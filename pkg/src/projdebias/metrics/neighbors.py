"""Neighborhood-based measures: how much k-NN sets move, and how many
neighbors were originally on one side of a bias direction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from projdebias.embeddings import EmbeddingSpace, topk_indices
from projdebias.errors import DataError


@dataclass(frozen=True)
class NeighborChange:
    changed: int
    per_token: dict = field(default_factory=dict)  # token -> {"entered": [...], "left": [...]}

    def to_json(self) -> dict:
        return {"changed": self.changed, "per_token": self.per_token}


def _check_pair(a: EmbeddingSpace, b: EmbeddingSpace):
    if a.vocab != b.vocab:
        raise DataError("spaces must share the same vocabulary in the same order")


def _topk_sets(space: EmbeddingSpace, idx, k):
    unit = space.unit_rows()
    out = []
    for i in idx:
        sims = np.clip(unit @ unit[i], -1.0, 1.0)
        out.append(topk_indices(sims, k, [i]))
    return out


def neighbor_stability(before: EmbeddingSpace, after: EmbeddingSpace, tokens, k: int) -> NeighborChange:
    """Total size of ``topk_before - topk_after`` over ``tokens``.

    Both sets have ``k`` members, so this equals the number of neighbors
    that entered. Each token's entering and leaving neighbors are listed.
    """
    _check_pair(before, after)
    if k < 0:
        raise DataError("k must be >= 0")
    idx = before.indices(tokens)
    if k == 0:
        return NeighborChange(0, {t: {"entered": [], "left": []} for t in tokens})
    old = _topk_sets(before, idx, k)
    new = _topk_sets(after, idx, k)
    per_token, changed = {}, 0
    for tok, o, n in zip(tokens, old, new):
        left = [before.vocab[i] for i in o if i not in set(n.tolist())]
        entered = [before.vocab[i] for i in n if i not in set(o.tolist())]
        per_token[tok] = {"entered": entered, "left": left}
        changed += len(left)
    return NeighborChange(changed, per_token)


@dataclass(frozen=True)
class BiasByNeighbor:
    percentage: float
    per_token: dict = field(default_factory=dict)
    biased_fraction_overall: float = 0.0
    degenerate: bool = False

    def to_json(self) -> dict:
        return {
            "percentage": self.percentage,
            "biased_fraction_overall": self.biased_fraction_overall,
            "degenerate": self.degenerate,
            "per_token": self.per_token,
        }


def originally_biased(space: EmbeddingSpace, bias_direction) -> np.ndarray:
    """Rows with strictly positive cosine to ``bias_direction`` (zero counts as not biased)."""
    v = np.asarray(bias_direction, dtype=np.float64)
    if v.shape != (space.dim,):
        raise DataError(f"bias direction has shape {v.shape}, expected ({space.dim},)")
    norm = np.linalg.norm(v)
    if norm == 0:
        return np.zeros(space.n, dtype=bool)
    return space.unit_rows() @ (v / norm) > 0


def bias_by_neighbor(
    original: EmbeddingSpace,
    debiased: EmbeddingSpace,
    probe_tokens,
    bias_direction,
    k: int = 100,
) -> BiasByNeighbor:
    """Mean over probe tokens of the percentage of their ``k`` nearest
    neighbors in ``debiased`` whose ``original`` vector leans toward
    ``bias_direction``. ``degenerate`` flags a direction no row leans toward
    (or every row does)."""
    _check_pair(original, debiased)
    if k < 1:
        raise DataError("k must be >= 1")
    biased = originally_biased(original, bias_direction)
    idx = debiased.indices(probe_tokens)
    if idx.size == 0:
        raise DataError("no probe tokens")
    per_token = {}
    for tok, nb in zip(probe_tokens, _topk_sets(debiased, idx, k)):
        per_token[tok] = float(100.0 * biased[nb].mean())
    pct = float(np.mean(list(per_token.values())))
    overall = float(biased.mean())
    return BiasByNeighbor(pct, per_token, overall, bool(overall in (0.0, 1.0)))
