"""Rank correlation between cosine similarity and human similarity ratings."""

from __future__ import annotations

import csv
import json
import logging
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from projdebias.embeddings import EmbeddingSpace
from projdebias.errors import DataError, ParseError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimilarityBenchmark:
    pairs: tuple  # (token, token, score)
    name: str = ""

    def __post_init__(self):
        pairs = tuple((str(a), str(b), float(s)) for a, b, s in self.pairs)
        seen = set()
        for a, b, s in pairs:
            if not np.isfinite(s):
                raise DataError(f"non-finite score for pair ({a}, {b})")
            if (a, b) in seen:
                raise DataError(f"duplicate pair ({a}, {b})")
            seen.add((a, b))
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def from_tsv(cls, path, name: str | None = None, score_column: int = 2) -> "SimilarityBenchmark":
        """``tok1 \\t tok2 \\t score`` rows; a non-numeric first row is a header."""
        pairs = []
        with open(os.fspath(path), encoding="utf-8", newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh, delimiter="\t"), start=1):
                if not row or not "".join(row).strip():
                    continue
                if len(row) <= score_column:
                    raise ParseError(f"expected at least {score_column + 1} columns", path, lineno)
                try:
                    score = float(row[score_column])
                except ValueError:
                    if lineno == 1:
                        continue
                    raise ParseError(f"bad score {row[score_column]!r}", path, lineno) from None
                pairs.append((row[0].strip(), row[1].strip(), score))
        return cls(pairs, name if name is not None else os.path.basename(os.fspath(path)))

    @classmethod
    def from_json(cls, data) -> "SimilarityBenchmark":
        if isinstance(data, dict):
            return cls([tuple(p) for p in data["pairs"]], data.get("name", ""))
        return cls([tuple(p) for p in data])

    @classmethod
    def load(cls, path) -> "SimilarityBenchmark":
        p = os.fspath(path)
        if p.endswith(".json"):
            with open(p, encoding="utf-8") as fh:
                bench = cls.from_json(json.load(fh))
            return bench if bench.name else cls(bench.pairs, os.path.basename(p))
        return cls.from_tsv(p)


@dataclass(frozen=True)
class SimilarityResult:
    name: str
    rho: float
    pairs_used: int
    pairs_dropped: int
    dropped: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "rho": self.rho,
            "pairs_used": self.pairs_used,
            "pairs_dropped": self.pairs_dropped,
        }


def pearson(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.size < 2:
        raise DataError("need two equal-length samples of size >= 2")
    a = a - a.mean()
    b = b - b.mean()
    denom = np.sqrt((a @ a) * (b @ b))
    if denom == 0:
        raise DataError("correlation undefined for a constant sample")
    return float(np.clip((a @ b) / denom, -1.0, 1.0))


def spearman(a, b) -> float:
    """Pearson correlation of average ranks (ties share their mean rank)."""
    return pearson(rankdata(a, method="average"), rankdata(b, method="average"))


def similarity_correlation(space: EmbeddingSpace, benchmark: SimilarityBenchmark) -> SimilarityResult:
    """Spearman rho between cosine similarity and human scores; pairs with
    an out-of-vocabulary token are dropped and counted."""
    unit = space.unit_rows()
    cos, human, dropped = [], [], []
    for a, b, s in benchmark.pairs:
        if a not in space or b not in space:
            dropped.append((a, b))
            continue
        cos.append(float(unit[space.index(a)] @ unit[space.index(b)]))
        human.append(s)
    if dropped:
        logger.warning("%s: dropped %d of %d pairs", benchmark.name, len(dropped), len(benchmark.pairs))
    rho = spearman(cos, human)
    return SimilarityResult(benchmark.name, rho, len(cos), len(dropped), dropped)
