"""Projection steps and ordered pipelines of them."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from projdebias.embeddings import EmbeddingSpace
from projdebias.geometry.projection import UnitVector, project_along, projection_matrix

STRATEGIES = ("MP", "TMP", "INLP", "RANDOM")


def _plain(value):
    """Metadata as JSON-friendly builtins."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    return value


@dataclass(frozen=True, eq=False)
class ProjectionStep:
    w: UnitVector
    strategy: str
    iteration: int = 0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if not isinstance(self.w, UnitVector):
            object.__setattr__(self, "w", UnitVector(self.w))
        object.__setattr__(self, "metadata", _plain(dict(self.metadata)))

    def apply(self, X) -> np.ndarray:
        return project_along(X, self.w)

    def to_json(self) -> dict:
        # float repr round-trips exactly
        return {
            "strategy": self.strategy,
            "iteration": self.iteration,
            "w": [float(x) for x in self.w.coords],
            "metadata": self.metadata,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ProjectionStep":
        w = np.asarray(data["w"], dtype=np.float64)
        return cls(UnitVector(w), data["strategy"], int(data.get("iteration", 0)), data.get("metadata", {}))


@dataclass(frozen=True, eq=False)
class ProjectionPipeline:
    """Ordered projections; ``warnings`` lists steps that were skipped as degenerate."""

    steps: tuple = ()
    source_space: str = ""
    dim: int | None = None
    warnings: tuple = ()

    def __post_init__(self):
        steps = tuple(self.steps)
        dims = {s.w.dim for s in steps}
        if self.dim is not None:
            dims.add(int(self.dim))
        if len(dims) > 1:
            raise ValueError(f"steps disagree on dimension: {sorted(dims)}")
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "dim", dims.pop() if dims else None)
        object.__setattr__(self, "warnings", tuple(self.warnings))

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def __add__(self, other: "ProjectionPipeline") -> "ProjectionPipeline":
        return ProjectionPipeline(
            self.steps + other.steps,
            self.source_space or other.source_space,
            self.dim if self.dim is not None else other.dim,
            self.warnings + other.warnings,
        )

    @property
    def directions(self) -> np.ndarray:
        return np.array([s.w.coords for s in self.steps]).reshape(len(self.steps), -1)

    def prefix(self, k: int) -> "ProjectionPipeline":
        return ProjectionPipeline(self.steps[:k], self.source_space, self.dim)

    def matrix(self, dim: int | None = None) -> np.ndarray:
        """Composed ``d x d`` map ``M`` with ``X @ M`` equal to :meth:`apply`."""
        d = self.dim if self.dim is not None else dim
        if d is None:
            raise ValueError("empty pipeline: pass dim to build the identity")
        if not self.steps:
            return np.eye(d)
        return projection_matrix(s.w for s in self.steps)

    def apply(self, X) -> np.ndarray:
        """Sequential projection of the rows of ``X``."""
        out = np.array(X, dtype=np.float64, copy=True)
        for s in self.steps:
            out = s.apply(out)
        return out

    def to_json(self) -> dict:
        return {
            "source_space": self.source_space,
            "dim": self.dim,
            "steps": [s.to_json() for s in self.steps],
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_json(cls, data: dict) -> "ProjectionPipeline":
        return cls(
            tuple(ProjectionStep.from_json(s) for s in data.get("steps", [])),
            data.get("source_space", ""),
            data.get("dim"),
            tuple(data.get("warnings", [])),
        )

    def save(self, path) -> None:
        with open(os.fspath(path), "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "ProjectionPipeline":
        with open(os.fspath(path), encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def concat(pipelines: Sequence[ProjectionPipeline]) -> ProjectionPipeline:
    out = ProjectionPipeline()
    for p in pipelines:
        out = out + p
    return out


def apply_pipeline(space: EmbeddingSpace, pipeline: ProjectionPipeline) -> EmbeddingSpace:
    """New space with the same vocabulary, every row projected in step order."""
    if pipeline.dim is not None and pipeline.dim != space.dim:
        raise ValueError(f"pipeline has dimension {pipeline.dim}, space has {space.dim}")
    if not pipeline.steps:
        return space.with_matrix(space.matrix)
    return space.with_matrix(pipeline.apply(space.matrix))
