"""Bias and space-stability metrics."""

from projdebias.metrics.fairness import (
    PredictionRecord,
    TprGapResult,
    load_predictions_csv,
    tpr_gap_suite,
)
from projdebias.metrics.neighbors import (
    BiasByNeighbor,
    NeighborChange,
    bias_by_neighbor,
    neighbor_stability,
    originally_biased,
)
from projdebias.metrics.similarity import (
    SimilarityBenchmark,
    SimilarityResult,
    pearson,
    similarity_correlation,
    spearman,
)
from projdebias.metrics.weat import WeatResult, WeatTest, weat, weat_effect_size

__all__ = [
    "BiasByNeighbor",
    "NeighborChange",
    "PredictionRecord",
    "SimilarityBenchmark",
    "SimilarityResult",
    "TprGapResult",
    "WeatResult",
    "WeatTest",
    "bias_by_neighbor",
    "load_predictions_csv",
    "neighbor_stability",
    "originally_biased",
    "pearson",
    "similarity_correlation",
    "spearman",
    "tpr_gap_suite",
    "weat",
    "weat_effect_size",
]
