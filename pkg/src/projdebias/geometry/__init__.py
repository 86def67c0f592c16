"""Projection, Tukey depth/median, exact linear-separation oracles."""

from projdebias.geometry.adversarial import (
    AdversarialInstance,
    build_adversarial_instance,
    certificate_errors,
    oracle_errors,
    regular_simplex,
)
from projdebias.geometry.classify import (
    LinearSplit,
    best_linear_classifier,
    best_linear_classifier_2d,
)
from projdebias.geometry.pointio import load_points_csv, save_points_csv
from projdebias.geometry.projection import (
    UnitVector,
    orthonormal_complement,
    project_along,
    projection_matrix,
)
from projdebias.geometry.tukey import (
    DepthResult,
    depth_lower_bound,
    tukey_depth_approx,
    tukey_depth_exact_2d,
    tukey_median_approx,
    tukey_median_exact_2d,
)

__all__ = [
    "AdversarialInstance",
    "DepthResult",
    "LinearSplit",
    "UnitVector",
    "best_linear_classifier",
    "best_linear_classifier_2d",
    "build_adversarial_instance",
    "certificate_errors",
    "depth_lower_bound",
    "load_points_csv",
    "oracle_errors",
    "orthonormal_complement",
    "project_along",
    "projection_matrix",
    "regular_simplex",
    "save_points_csv",
    "tukey_depth_approx",
    "tukey_depth_exact_2d",
    "tukey_median_approx",
    "tukey_median_exact_2d",
]
