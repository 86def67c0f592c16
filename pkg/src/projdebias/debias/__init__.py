"""Projection strategies and pipelines."""

from projdebias.debias.pipeline import (
    STRATEGIES,
    ProjectionPipeline,
    ProjectionStep,
    apply_pipeline,
    concat,
)
from projdebias.debias.strategies import (
    covariance,
    mp_multiclass,
    mp_step,
    random_pipeline,
    random_step,
    tmp_step,
)
from projdebias.debias.inlp import InlpResult, inlp_run

__all__ = [
    "STRATEGIES",
    "InlpResult",
    "ProjectionPipeline",
    "ProjectionStep",
    "apply_pipeline",
    "concat",
    "covariance",
    "inlp_run",
    "mp_multiclass",
    "mp_step",
    "random_pipeline",
    "random_step",
    "tmp_step",
]
