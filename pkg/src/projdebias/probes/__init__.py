"""Probes that measure what information remains in a space."""

from projdebias.probes.linear import (
    LinearProbe,
    ProbeReport,
    evaluate_probe,
    majority_rate,
    train_linear,
)
from projdebias.probes.cluster import VMeasure, kmeans, kmeans_vmeasure, v_measure
from projdebias.probes.mlp import MlpProbe, train_mlp, train_mlp_probe
from projdebias.probes.guarding import guarding_curve, is_guarded, probe_report

__all__ = [
    "LinearProbe",
    "MlpProbe",
    "ProbeReport",
    "VMeasure",
    "evaluate_probe",
    "guarding_curve",
    "is_guarded",
    "kmeans",
    "kmeans_vmeasure",
    "majority_rate",
    "probe_report",
    "train_linear",
    "train_mlp",
    "train_mlp_probe",
    "v_measure",
]
