"""True-positive-rate gaps between two groups over a set of professions."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from projdebias.errors import DataError, ParseError
from projdebias.metrics.similarity import pearson, spearman


@dataclass(frozen=True)
class PredictionRecord:
    true_label: str
    predicted_label: str
    group: str


def load_predictions_csv(path) -> list[PredictionRecord]:
    """CSV with header ``true,predicted,group``."""
    out = []
    with open(os.fspath(path), encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        need = {"true", "predicted", "group"}
        if reader.fieldnames is None or not need <= set(reader.fieldnames):
            raise ParseError("header must contain true,predicted,group", path, 1)
        for lineno, row in enumerate(reader, start=2):
            if any(row.get(c) in (None, "") for c in need):
                raise ParseError("missing field", path, lineno)
            out.append(PredictionRecord(row["true"], row["predicted"], row["group"]))
    return out


@dataclass(frozen=True)
class TprGapResult:
    accuracy: float
    groups: tuple
    tpr: dict
    gap: dict
    gap_rms: float
    correlation: float | None
    excluded: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "groups": list(self.groups),
            "tpr": self.tpr,
            "gap": self.gap,
            "gap_rms": self.gap_rms,
            "correlation": self.correlation,
            "excluded": self.excluded,
        }


def tpr_gap_suite(
    records,
    group_rates: dict | None = None,
    groups: tuple | None = None,
    labels=None,
    correlation: str = "pearson",
) -> TprGapResult:
    """Accuracy, per-profession ``TPR_g - TPR_other``, their RMS, and the
    correlation of the gaps with ``group_rates`` (share of group ``g`` per
    profession).

    ``groups`` is ``(g, other)``; by default the two observed tags in sorted
    order. Professions lacking true instances in either group are excluded
    from the gaps and listed in ``excluded``. ``labels`` declares the label
    set; any record outside it is an error.
    """
    records = list(records)
    if not records:
        raise DataError("no prediction records")
    if correlation not in ("pearson", "spearman"):
        raise ValueError("correlation must be 'pearson' or 'spearman'")
    y = np.array([r.true_label for r in records], dtype=object)
    yhat = np.array([r.predicted_label for r in records], dtype=object)
    g = np.array([r.group for r in records], dtype=object)
    if labels is None:
        labels = sorted(set(y.tolist()))
    else:
        labels = list(labels)
        unknown = (set(y.tolist()) | set(yhat.tolist())) - set(labels)
        if unknown:
            raise DataError(f"labels outside the declared set: {sorted(unknown)}")
    if groups is None:
        seen = sorted(set(g.tolist()))
        if len(seen) != 2:
            raise DataError(f"expected exactly two groups, found {seen}")
        groups = tuple(seen)
    elif len(groups) != 2:
        raise DataError("groups must name exactly two tags")
    g0, g1 = groups
    tpr, gap, excluded = {}, {}, []
    for lab in labels:
        rates = {}
        for grp in (g0, g1):
            mask = (y == lab) & (g == grp)
            if mask.any():
                rates[grp] = float(np.mean(yhat[mask] == lab))
        tpr[lab] = rates
        if len(rates) == 2:
            gap[lab] = rates[g0] - rates[g1]
        else:
            excluded.append(lab)
    gaps = np.array(list(gap.values()), dtype=np.float64)
    rms = float(np.sqrt(np.mean(gaps**2))) if gaps.size else 0.0
    corr = None
    if group_rates:
        common = [lab for lab in gap if lab in group_rates]
        if len(common) >= 2:
            a = [gap[lab] for lab in common]
            b = [float(group_rates[lab]) for lab in common]
            fn = pearson if correlation == "pearson" else spearman
            try:
                corr = fn(a, b)
            except DataError:
                corr = None
    return TprGapResult(float(np.mean(y == yhat)), (g0, g1), tpr, gap, rms, corr, excluded)
