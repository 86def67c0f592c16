"""Randomised checks of the geometric bounds the projection methods rely on.

Each suite draws seeded random instances, runs the exact routines and
reports how many instances satisfy the bound.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from projdebias.geometry.adversarial import build_adversarial_instance, oracle_errors
from projdebias.geometry.classify import best_linear_classifier
from projdebias.geometry.projection import UnitVector, orthonormal_complement, project_along
from projdebias.geometry.tukey import depth_lower_bound, tukey_median_exact_2d


@dataclass
class SuiteResult:
    name: str
    total: int = 0
    passed: int = 0
    seconds: float = 0.0
    failures: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.total > 0 and self.passed == self.total

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return f"{status} {self.name}: {self.passed}/{self.total} in {self.seconds:.1f}s"

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "ok": self.ok,
            "total": self.total,
            "passed": self.passed,
            "seconds": self.seconds,
            "failures": self.failures[:20],
            "details": self.details,
        }


def _random_cloud(rng, n, dim=2):
    """Gaussian blob with a random anisotropic shape, sometimes on a lattice
    (to exercise ties and collinearity)."""
    A = rng.standard_normal((dim, dim))
    pts = rng.standard_normal((n, dim)) @ A + rng.normal(0, 2, dim)
    if rng.random() < 0.2:
        pts = np.round(pts)
    return pts


def tukey_bound_suite(instances: int = 500, max_n: int = 30, rng_seed: int = 0) -> SuiteResult:
    """After projecting along the difference of the two exact Tukey medians,
    every linear classifier errs on at least ``min(t-, t+)`` points."""
    res = SuiteResult("tukey-median-projection lower bound")
    rng = np.random.default_rng(rng_seed)
    t0 = time.perf_counter()
    while res.total < instances:
        Pm = _random_cloud(rng, int(rng.integers(1, max_n + 1)))
        Pp = _random_cloud(rng, int(rng.integers(1, max_n + 1)))
        if rng.random() < 0.5:
            Pp = Pp - Pp.mean(axis=0) + Pm.mean(axis=0) + rng.normal(0, 1, 2)
        tm = tukey_median_exact_2d(Pm)
        tp = tukey_median_exact_2d(Pp)
        diff = tp.point - tm.point
        if np.linalg.norm(diff) < 1e-9:
            continue
        w = UnitVector.from_vector(diff)
        B = orthonormal_complement(w)
        errors = best_linear_classifier(project_along(Pm, w) @ B, project_along(Pp, w) @ B).errors
        bound = min(tm.depth, tp.depth)
        res.total += 1
        if errors >= bound:
            res.passed += 1
        else:
            res.failures.append({"instance": res.total - 1, "errors": errors, "bound": bound})
    res.seconds = time.perf_counter() - t0
    return res


def depth_bound_suite(instances: int = 500, max_n: int = 30, rng_seed: int = 0) -> SuiteResult:
    """Exact planar median depth is at least ``ceil(n/3)``, and at most
    ``ceil(n/2)`` when the points are pairwise distinct."""
    res = SuiteResult("tukey median depth bound")
    rng = np.random.default_rng(rng_seed)
    t0 = time.perf_counter()
    for i in range(instances):
        n = int(rng.integers(1, max_n + 1))
        P = _random_cloud(rng, n)
        med = tukey_median_exact_2d(P)
        lo = depth_lower_bound(n, 2)
        distinct = np.unique(P, axis=0).shape[0] == n
        hi = math.ceil(n / 2) if distinct else n
        res.total += 1
        if lo <= med.depth <= hi:
            res.passed += 1
        else:
            res.failures.append({"instance": i, "n": n, "depth": med.depth, "bound": lo})
    res.seconds = time.perf_counter() - t0
    return res


def _directions(rng, count, dim):
    """Half uniform on the sphere, half concentrated near the last axis,
    where the cluster and the simplex start to collide."""
    half = count // 2
    U = rng.standard_normal((count, dim))
    U[half:, :-1] *= rng.uniform(0.01, 0.5, (count - half, 1))
    U[half:, -1] = np.abs(U[half:, -1]) + 1.0
    return U / np.linalg.norm(U, axis=1, keepdims=True)


def misclassify_upper_suite(
    dims=(2, 3),
    sizes=(6, 9, 12),
    directions: int = 2000,
    rng_seed: int = 0,
) -> SuiteResult:
    """On the simplex-versus-cluster instance, no projection direction forces
    more than ``ceil(m/d)`` errors. ``details`` also records the worst count
    against the tighter ``ceil(m/(d+1))``."""
    res = SuiteResult("single-projection misclassification upper bound")
    rng = np.random.default_rng(rng_seed)
    t0 = time.perf_counter()
    for d in dims:
        for m in sizes:
            inst = build_adversarial_instance(d, m, m, rng_seed=int(rng.integers(2**31)))
            bound = math.ceil(m / d)
            worst = 0
            for k, u in enumerate(_directions(rng, directions, d + 1)):
                e = oracle_errors(inst, u)
                worst = max(worst, e)
                res.total += 1
                if e <= bound:
                    res.passed += 1
                else:
                    res.failures.append({"d": d, "m": m, "direction": k, "errors": e})
            res.details[f"d={d},m={m}"] = {
                "worst_errors": worst,
                "bound_ceil_m_over_d": bound,
                "bound_ceil_m_over_d_plus_1": inst.misclassification_bound(),
            }
    res.seconds = time.perf_counter() - t0
    return res


SUITES = {
    "tukey-bound": tukey_bound_suite,
    "depth-bound": depth_bound_suite,
    "misclassify-upper": misclassify_upper_suite,
}


def run_all(rng_seed: int = 0) -> list[SuiteResult]:
    return [fn(rng_seed=rng_seed) for fn in SUITES.values()]
