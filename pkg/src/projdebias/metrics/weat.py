"""Word Embedding Association Test."""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field

import numpy as np

from projdebias.embeddings import EmbeddingSpace
from projdebias.errors import DataError, UnknownTokenError

logger = logging.getLogger(__name__)

_FIELDS = ("targets_X", "targets_Y", "attributes_A", "attributes_B")


@dataclass(frozen=True)
class WeatTest:
    targets_X: tuple
    targets_Y: tuple
    attributes_A: tuple
    attributes_B: tuple
    name: str = ""

    def __post_init__(self):
        for f in _FIELDS:
            vals = tuple(getattr(self, f))
            if not vals:
                raise DataError(f"{f} must be non-empty")
            object.__setattr__(self, f, vals)
        if set(self.targets_X) & set(self.targets_Y):
            raise DataError("a token appears in both target lists")
        if set(self.attributes_A) & set(self.attributes_B):
            raise DataError("a token appears in both attribute lists")

    @classmethod
    def from_json(cls, data: dict) -> "WeatTest":
        missing = [f for f in _FIELDS if f not in data]
        if missing:
            raise DataError(f"WEAT test is missing {missing}")
        return cls(*(data[f] for f in _FIELDS), name=data.get("name", ""))

    @classmethod
    def load(cls, path) -> list["WeatTest"]:
        """A JSON object, or a list of them."""
        with open(os.fspath(path), encoding="utf-8") as fh:
            data = json.load(fh)
        items = data if isinstance(data, list) else [data]
        return [cls.from_json(d) for d in items]

    def swapped_attributes(self) -> "WeatTest":
        return WeatTest(self.targets_X, self.targets_Y, self.attributes_B, self.attributes_A, self.name)

    def swapped_targets(self) -> "WeatTest":
        return WeatTest(self.targets_Y, self.targets_X, self.attributes_A, self.attributes_B, self.name)


@dataclass(frozen=True)
class WeatResult:
    name: str
    effect_size: float
    numerator: float  # mean_X s - mean_Y s
    statistic: float  # sum_X s - sum_Y s
    stdev: float
    dropped: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "effect_size": self.effect_size,
            "numerator": self.numerator,
            "statistic": self.statistic,
            "stdev": self.stdev,
            "dropped": self.dropped,
            "dropped_count": sum(len(v) for v in self.dropped.values()),
        }


def _unit(space, tokens, what, missing, dropped):
    kept = []
    for t in tokens:
        if t in space:
            kept.append(t)
        elif missing == "error":
            raise UnknownTokenError(t)
        else:
            dropped.setdefault(what, []).append(t)
    if not kept:
        raise DataError(f"no {what} token is in the vocabulary")
    M = space.matrix[space.indices(kept)]
    norms = np.linalg.norm(M, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise DataError(f"zero vector among {what}")
    return M / norms


def weat(space: EmbeddingSpace, test: WeatTest, missing: str = "skip") -> WeatResult:
    """Association ``s(w) = mean cos(w, A) - mean cos(w, B)`` for every
    target; effect size is the X-minus-Y mean difference of ``s`` over the
    sample standard deviation (ddof=1) of ``s`` on X and Y together.

    ``missing='skip'`` drops out-of-vocabulary tokens (listed in
    ``dropped``); ``missing='error'`` raises.
    """
    if missing not in ("skip", "error"):
        raise ValueError("missing must be 'skip' or 'error'")
    dropped: dict = {}
    X = _unit(space, test.targets_X, "targets_X", missing, dropped)
    Y = _unit(space, test.targets_Y, "targets_Y", missing, dropped)
    A = _unit(space, test.attributes_A, "attributes_A", missing, dropped)
    B = _unit(space, test.attributes_B, "attributes_B", missing, dropped)
    if dropped:
        logger.warning("WEAT %s: dropped %d missing tokens", test.name, sum(map(len, dropped.values())))
    sX = (X @ A.T).mean(axis=1) - (X @ B.T).mean(axis=1)
    sY = (Y @ A.T).mean(axis=1) - (Y @ B.T).mean(axis=1)
    both = np.concatenate([sX, sY])
    if both.size < 2:
        raise DataError("need at least two targets for a standard deviation")
    sd = float(np.std(both, ddof=1))
    numerator = float(sX.mean() - sY.mean())
    if sd <= 1e-15:
        raise DataError("association scores have zero spread; effect size undefined")
    return WeatResult(test.name, numerator / sd, numerator, float(sX.sum() - sY.sum()), sd, dropped)


def weat_effect_size(space: EmbeddingSpace, test: WeatTest, raw: bool = False, missing: str = "skip") -> float:
    """Effect size, or with ``raw`` the unnormalised mean difference."""
    r = weat(space, test, missing=missing)
    return r.numerator if raw else r.effect_size
