"""Linear concept erasure with single targeted projections.

Mean Projection (MP) and Tukey Median Projection (TMP) remove a discrete
attribute from an embedding space with one projection per class boundary.
Iterative nullspace projection (INLP) and eigenvalue-weighted random
projections are included as baselines, together with the probes and bias
metrics used to compare them.
"""

__version__ = "0.1.0"

from projdebias.embeddings import (  # noqa: E402
    EmbeddingSpace,
    NeighborList,
    cosine,
    load_text_embeddings,
    nearest_neighbors,
    save_text_embeddings,
)

__all__ = [
    "__version__",
    "EmbeddingSpace",
    "NeighborList",
    "cosine",
    "load_text_embeddings",
    "nearest_neighbors",
    "save_text_embeddings",
]
