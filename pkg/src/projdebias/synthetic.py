"""Seeded synthetic data with known structure, for tests and demos."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from projdebias.attribute_data import AttributeClass, LabeledPointSet, split
from projdebias.embeddings import EmbeddingSpace
from projdebias.metrics.similarity import SimilarityBenchmark
from projdebias.metrics.weat import WeatTest


def gaussian_classes(k: int, d: int, n_per_class: int, separation: float = 4.0, rng_seed=0):
    """``k`` unit-covariance Gaussians whose means are pairwise ``separation`` apart.

    Means sit at ``separation / sqrt(2)`` along the first ``k`` axes.
    Returns ``(X, y)`` with ``y`` in ``0..k-1``.
    """
    if k > d:
        raise ValueError("need d >= k")
    rng = np.random.default_rng(rng_seed)
    means = np.zeros((k, d))
    means[np.arange(k), np.arange(k)] = separation / np.sqrt(2.0)
    X = np.vstack([rng.standard_normal((n_per_class, d)) + means[c] for c in range(k)])
    y = np.repeat(np.arange(k), n_per_class)
    return X, y


def gaussian_dataset(k, d, n_per_class, separation=4.0, rng_seed=0, fractions=(0.65, 0.10, 0.25)):
    """``gaussian_classes`` wrapped as a split :class:`LabeledPointSet`
    (labels ``c0``, ``c1``, ...)."""
    X, y = gaussian_classes(k, d, n_per_class, separation, rng_seed)
    classes = [AttributeClass(f"c{c}", np.flatnonzero(y == c)) for c in range(k)]
    ds = split(LabeledPointSet("gaussian", classes), fractions, rng_seed=rng_seed)
    return X, ds


@dataclass(frozen=True, eq=False)
class PlantedSpace:
    space: EmbeddingSpace
    benchmark: SimilarityBenchmark
    weat: WeatTest
    seed_pair: tuple
    gender_axis: int
    nuisance_axes: tuple
    semantic_axes: tuple


def gendered_count(n_words: int, gendered_fraction: float = 0.3) -> int:
    """Number of ``m*`` (equally, ``f*``) tokens in a planted space."""
    return int(round(gendered_fraction * n_words)) // 2


def planted_space(
    rng_seed=0,
    n_words: int = 5000,
    d: int = 200,
    gendered_fraction: float = 0.3,
    gender_scale: float = 4.0,
    n_nuisance: int = 0,
    nuisance_scale: float = 30.0,
    n_latent: int | None = None,
    noise_scale: float = 0.3,
    stereotype: float = 0.5,
    n_pairs: int = 400,
    gendered_pair_fraction: float = 0.5,
    score_noise: float = 0.05,
) -> PlantedSpace:
    """Embedding space with three kinds of structure.

    - axis 0 encodes gender: ``m*`` tokens sit near ``+gender_scale``,
      ``f*`` tokens near ``-gender_scale``, ``w*`` tokens near 0;
    - ``n_nuisance`` optional axes of very high variance carry nothing of
      interest (they become the dominant principal components);
    - the remaining axes hold an ``n_latent``-dimensional meaning factor
      (by default as many dimensions as there are axes left) under
      isotropic noise. Human scores for the benchmark pairs are
      cosines of the latent factors, so the gender and nuisance components
      only blur the observed cosines.

    ``gendered_pair_fraction`` of the pairs start from a gendered word.
    ``he``/``she`` are pure gender anchors. The WEAT test contrasts neutral
    words at the two ends of latent factor 0, which carry a planted
    ``+-stereotype`` gender lean, with the male and female tokens.
    """
    rng = np.random.default_rng(rng_seed)
    sem = np.arange(1 + n_nuisance, d)
    nui = np.arange(1, 1 + n_nuisance)
    if n_latent is None:
        n_latent = sem.size
    if n_latent < 1 or sem.size < n_latent:
        raise ValueError("d too small for the requested latent dimension")
    if n_pairs > n_words * (n_words - 1) // 4:
        raise ValueError("too few words for that many distinct benchmark pairs")
    n_g = gendered_count(n_words, gendered_fraction)
    n_n = n_words - 2 * n_g
    Z = rng.standard_normal((n_words, n_latent))
    basis, _ = np.linalg.qr(rng.standard_normal((sem.size, n_latent)))
    M = np.zeros((n_words, d))
    M[:, sem] = Z @ basis.T + noise_scale * rng.standard_normal((n_words, sem.size))
    M[:, nui] = nuisance_scale * rng.standard_normal((n_words, n_nuisance))
    gender = np.zeros(n_words)
    gender[:n_g] = gender_scale * (1 + 0.25 * rng.standard_normal(n_g))
    gender[n_g : 2 * n_g] = -gender_scale * (1 + 0.25 * rng.standard_normal(n_g))
    gender[2 * n_g :] = 0.3 * rng.standard_normal(n_n)
    lean = np.flatnonzero(np.arange(n_words) >= 2 * n_g)
    gender[lean] += stereotype * np.clip(Z[lean, 0], -1.0, 1.0)
    M[:, 0] = gender
    vocab = [f"m{i}" for i in range(n_g)] + [f"f{i}" for i in range(n_g)] + [f"w{i}" for i in range(n_n)]
    anchors = np.zeros((2, d))
    anchors[0, 0] = 3 * gender_scale
    anchors[1, 0] = -3 * gender_scale
    space = EmbeddingSpace(["he", "she"] + vocab, np.vstack([anchors, M]), name=f"planted-{rng_seed}")

    # benchmark: random pairs scored by latent cosine; a share of them
    # starts from a gendered word
    U = Z / np.linalg.norm(Z, axis=1, keepdims=True)
    seen, pairs = set(), []
    while len(pairs) < n_pairs:
        first_range = 2 * n_g if (n_g and rng.random() < gendered_pair_fraction) else n_words
        a, b = int(rng.integers(first_range)), int(rng.integers(n_words))
        key = (min(a, b), max(a, b))
        if a == b or key in seen:
            continue
        seen.add(key)
        score = float(U[a] @ U[b]) + score_noise * rng.standard_normal()
        pairs.append((vocab[a], vocab[b], score))
    bench = SimilarityBenchmark(pairs, name="planted-similarity")

    order = lean[np.argsort(Z[lean, 0])]
    X = [vocab[i] for i in order[::-1][:8]]
    Y = [vocab[i] for i in order[:8]]
    A = [f"m{i}" for i in range(min(8, n_g))]
    B = [f"f{i}" for i in range(min(8, n_g))]
    test = WeatTest(X, Y, A, B, name="planted-weat")
    return PlantedSpace(space, bench, test, ("he", "she"), 0, tuple(nui.tolist()), tuple(sem.tolist()))
