"""Two-class Otsu clustering of one-dimensional cost arrays."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import EmptyInput, NonFiniteInput

# Candidate splits whose between-class variance is within this relative margin
# of the best are treated as tied; the smallest threshold wins.
TIE_RTOL = 1e-9


@dataclass(frozen=True)
class OtsuResult:
    threshold: float
    low_class_count: int
    high_class_count: int
    between_class_variance: float

    def low_mask(self, values):
        return np.asarray(values) <= self.threshold

    def to_json_dict(self):
        return {
            "threshold": self.threshold,
            "low_class_count": self.low_class_count,
            "high_class_count": self.high_class_count,
            "between_class_variance": self.between_class_variance,
        }


def _pick(scores):
    best = scores.max()
    return int(np.flatnonzero(scores >= best - TIE_RTOL * abs(best))[0])


def otsu_threshold(values, bins: Optional[int] = None) -> OtsuResult:
    """Split ``values`` into a low and a high class maximising between-class variance.

    With ``bins=None`` every distinct value is its own histogram cell, so all
    split points between consecutive distinct values are candidates. With an
    integer ``bins`` the values are histogrammed into equal-width cells over
    ``[min, max]`` and only the interior cell edges are candidates. Either way
    the class means come from the raw values, the low class is
    ``values <= threshold`` and ties go to the smaller threshold.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise EmptyInput("otsu_threshold needs at least one value")
    if not np.all(np.isfinite(v)):
        raise NonFiniteInput("values must be finite")
    lo, hi = v.min(), v.max()
    n = v.size
    if lo == hi:
        return OtsuResult(float(lo), n, 0, 0.0)

    if bins is None:
        uniq, counts = np.unique(v, return_counts=True)
        sums = uniq * counts
        thresholds = uniq[:-1]
    else:
        if bins < 2:
            raise ValueError("bins must be >= 2")
        edges = np.linspace(lo, hi, bins + 1)
        cell = np.clip(np.searchsorted(edges, v, side="left") - 1, 0, bins - 1)
        counts = np.bincount(cell, minlength=bins)
        sums = np.bincount(cell, weights=v, minlength=bins)
        thresholds = edges[1:-1]

    c0 = np.cumsum(counts)[:-1].astype(np.float64)
    s0 = np.cumsum(sums)[:-1]
    c1 = n - c0
    s1 = sums.sum() - s0
    valid = (c0 > 0) & (c1 > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        mu0 = s0 / c0
        mu1 = s1 / c1
        scores = (c0 / n) * (c1 / n) * (mu1 - mu0) ** 2
    scores = np.where(valid, scores, -np.inf)
    k = _pick(scores)
    return OtsuResult(
        threshold=float(thresholds[k]),
        low_class_count=int(c0[k]),
        high_class_count=int(c1[k]),
        between_class_variance=float(scores[k]),
    )
