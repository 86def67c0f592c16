"""Embedding spaces: text-format I/O, cosine similarity and exact k-NN search."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from projdebias.errors import DataError, ParseError, UnknownTokenError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EmbeddingSpace:
    """Vocabulary paired with a row-indexed ``n x d`` float64 matrix.

    The matrix is stored read-only; transformations return new spaces.
    """

    vocab: tuple[str, ...]
    matrix: np.ndarray
    name: str = ""
    duplicates_skipped: int = 0
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        vocab = tuple(self.vocab)
        matrix = np.array(self.matrix, dtype=np.float64, copy=True)
        if matrix.ndim != 2:
            raise DataError(f"matrix must be 2-D, got shape {matrix.shape}")
        if len(vocab) != matrix.shape[0]:
            raise DataError(
                f"vocab has {len(vocab)} tokens but matrix has {matrix.shape[0]} rows"
            )
        if matrix.shape[0] and matrix.shape[1] < 1:
            raise DataError("dimension must be >= 1")
        if not np.all(np.isfinite(matrix)):
            raise DataError("matrix contains non-finite values")
        index = {}
        for i, tok in enumerate(vocab):
            if tok in index:
                raise DataError(f"duplicate token {tok!r}")
            index[tok] = i
        matrix.setflags(write=False)
        object.__setattr__(self, "vocab", vocab)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "_index", index)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __len__(self):
        return self.n

    def __contains__(self, token):
        return token in self._index

    def index(self, token: str) -> int:
        try:
            return self._index[token]
        except KeyError:
            raise UnknownTokenError(token) from None

    def indices(self, tokens: Iterable[str]) -> np.ndarray:
        return np.array([self.index(t) for t in tokens], dtype=np.intp)

    def vector(self, token: str) -> np.ndarray:
        return self.matrix[self.index(token)]

    def with_matrix(self, matrix: np.ndarray, name: str | None = None) -> "EmbeddingSpace":
        """Same vocabulary, new coordinates."""
        return EmbeddingSpace(self.vocab, matrix, name=self.name if name is None else name)

    def restrict(self, tokens: Sequence[str], name: str | None = None) -> "EmbeddingSpace":
        idx = self.indices(tokens)
        return EmbeddingSpace(
            [self.vocab[i] for i in idx], self.matrix[idx], name=name or self.name
        )

    def unit_rows(self) -> np.ndarray:
        """Row-normalised copy of the matrix; zero rows stay zero."""
        norms = np.linalg.norm(self.matrix, axis=1, keepdims=True)
        safe = np.where(norms > 0, norms, 1.0)
        return self.matrix / safe


@dataclass(frozen=True)
class NeighborList:
    query: str | None
    neighbors: tuple[tuple[str, float], ...]

    @property
    def tokens(self) -> list[str]:
        return [t for t, _ in self.neighbors]

    def format_line(self) -> str:
        """``query \\t tok:sim,tok:sim`` line used by the neighbor dumps."""
        body = ",".join(f"{t}:{s:.6f}" for t, s in self.neighbors)
        return f"{self.query if self.query is not None else '<vector>'}\t{body}"

    def to_json(self) -> list:
        return [[t, float(s)] for t, s in self.neighbors]


def _looks_like_header(fields: list[str]) -> bool:
    if len(fields) != 2:
        return False
    try:
        int(fields[0])
        int(fields[1])
    except ValueError:
        return False
    return True


def load_text_embeddings(path, limit: int | None = None, name: str | None = None) -> EmbeddingSpace:
    """Parse a whitespace-separated ``token v1 ... vd`` file.

    A word2vec-style ``n d`` header on the first line is detected and
    skipped. ``limit`` keeps the first rows in file order, which is taken
    to be frequency order. Duplicate tokens keep their first occurrence.
    """
    if limit is not None and limit < 1:
        raise ValueError("limit must be a positive integer")
    path = os.fspath(path)
    vocab: list[str] = []
    rows: list[np.ndarray] = []
    seen: set[str] = set()
    dim = None
    duplicates = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            fields = line.split()
            if not fields:
                continue
            if lineno == 1 and _looks_like_header(fields):
                continue
            if len(fields) < 2:
                raise ParseError("line has a token but no coordinates", path, lineno)
            token = fields[0]
            if dim is None:
                dim = len(fields) - 1
            elif len(fields) - 1 != dim:
                raise ParseError(
                    f"expected {dim} coordinates, found {len(fields) - 1}", path, lineno
                )
            try:
                values = np.array(fields[1:], dtype=np.float64)
            except ValueError as exc:
                raise ParseError(f"bad coordinate: {exc}", path, lineno) from None
            if not np.all(np.isfinite(values)):
                raise ParseError("non-finite coordinate", path, lineno)
            if token in seen:
                duplicates += 1
                continue
            seen.add(token)
            vocab.append(token)
            rows.append(values)
            if limit is not None and len(vocab) >= limit:
                break
    if not vocab:
        raise ParseError("no embedding rows found", path)
    if limit is not None and len(vocab) < limit:
        logger.warning("limit %d exceeds the %d rows in %s; using all rows", limit, len(vocab), path)
    if duplicates:
        logger.warning("%s: skipped %d duplicate token(s)", path, duplicates)
    space = EmbeddingSpace(vocab, np.vstack(rows), name=name or os.path.basename(path))
    object.__setattr__(space, "duplicates_skipped", duplicates)
    return space


def save_text_embeddings(space: EmbeddingSpace, path, precision: int = 10) -> None:
    """Write ``space`` in the same text format ``load_text_embeddings`` reads."""
    if space.n == 0:
        raise DataError("refusing to write an empty embedding space")
    fmt = f"%.{precision}g"
    with open(os.fspath(path), "w", encoding="utf-8") as fh:
        for token, row in zip(space.vocab, space.matrix):
            fh.write(token)
            fh.write(" ")
            fh.write(" ".join(fmt % v for v in row))
            fh.write("\n")


def cosine(space: EmbeddingSpace, a: str, b: str) -> float:
    va = space.vector(a)
    vb = space.vector(b)
    na = np.linalg.norm(va)
    nb = np.linalg.norm(vb)
    if na == 0 or nb == 0:
        raise DataError(f"cosine undefined for zero vector ({a!r} or {b!r})")
    return float(np.clip(np.dot(va, vb) / (na * nb), -1.0, 1.0))


def cosine_vectors(u: np.ndarray, v: np.ndarray) -> float:
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise DataError("cosine undefined for zero vector")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def topk_indices(sims: np.ndarray, k: int, excluded=()) -> np.ndarray:
    """Indices of the ``k`` largest ``sims``; ties go to the lower index."""
    sims = np.array(sims, dtype=np.float64, copy=True)
    excluded = np.asarray(list(excluded), dtype=np.intp)
    available = sims.shape[0] - np.unique(excluded).size
    if k > available:
        raise DataError(f"k={k} exceeds the {available} available points")
    if k <= 0:
        return np.empty(0, dtype=np.intp)
    if excluded.size:
        sims[excluded] = -np.inf
    if k < sims.shape[0]:
        kth = np.partition(-sims, k - 1)[k - 1]
        cand = np.flatnonzero(-sims <= kth)
    else:
        cand = np.arange(sims.shape[0])
    order = np.lexsort((cand, -sims[cand]))
    return cand[order][:k]


def nearest_neighbors(
    space: EmbeddingSpace,
    query,
    k: int,
    exclude: Iterable[str] = (),
    unit_rows: np.ndarray | None = None,
) -> NeighborList:
    """Exact top-``k`` neighbors by cosine similarity.

    ``query`` is a token or a ``d``-vector. A token query is never returned
    as its own neighbor. Pass precomputed ``unit_rows`` when issuing many
    queries against the same space.
    """
    if isinstance(query, str):
        qtok = query
        qvec = space.vector(query)
        excluded = {space.index(query)}
    else:
        qtok = None
        qvec = np.asarray(query, dtype=np.float64)
        if qvec.shape != (space.dim,):
            raise DataError(f"query has shape {qvec.shape}, expected ({space.dim},)")
        excluded = set()
    excluded.update(space.index(t) for t in exclude)
    qnorm = np.linalg.norm(qvec)
    if qnorm == 0:
        raise DataError("zero query vector")
    if unit_rows is None:
        unit_rows = space.unit_rows()
    sims = np.clip(unit_rows @ (qvec / qnorm), -1.0, 1.0)
    idx = topk_indices(sims, k, sorted(excluded))
    return NeighborList(qtok, tuple((space.vocab[i], float(sims[i])) for i in idx))
