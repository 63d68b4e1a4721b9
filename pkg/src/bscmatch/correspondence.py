"""Forward/backward best-match correspondences and their costs.

Forward pairs let every row point of the cost matrix pick its cheapest column;
backward pairs let every column point pick its cheapest row. Each direction is
pruned separately by two-class clustering of its match costs.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import _backend
from .clustering import otsu_threshold
from .descriptor import CostMatrix
from .errors import EmptyMatrix


class Direction(enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


class CorrespondencePair(NamedTuple):
    source_index: int
    target_index: int
    cost: float


def _as_values(M):
    v = M.values if isinstance(M, CostMatrix) else np.asarray(M, dtype=np.float64)
    if v.ndim != 2 or v.size == 0:
        raise EmptyMatrix("cost matrix is empty")
    return np.ascontiguousarray(v)


@dataclass(frozen=True, eq=False)
class CorrespondenceSet:
    direction: Direction
    source: np.ndarray  # (k,) source indices, 0..k-1 in order
    target: np.ndarray  # (k,) chosen target index per source
    costs: np.ndarray   # (k,) matched cost per source
    average_cost: float

    def __len__(self):
        return len(self.source)

    @property
    def pairs(self):
        return [
            CorrespondencePair(int(s), int(t), float(c))
            for s, t, c in zip(self.source, self.target, self.costs)
        ]

    def p_q_indices(self):
        """(p index, q index) arrays regardless of direction."""
        if self.direction is Direction.FORWARD:
            return self.source, self.target
        return self.target, self.source

    def to_json_dict(self, pruned: Optional["PrunedCorrespondenceSet"] = None):
        p, q = self.p_q_indices()
        d = {
            "direction": self.direction.value,
            "pairs": [
                {"p": int(i), "q": int(j), "cost": float(c)}
                for i, j, c in zip(p, q, self.costs)
            ],
            "average_cost": self.average_cost,
        }
        if pruned is not None:
            d["pruned"] = pruned.to_json_dict()
        return d


def _build(direction, idx, val):
    return CorrespondenceSet(
        direction=direction,
        source=np.arange(len(idx), dtype=np.int64),
        target=np.asarray(idx, dtype=np.int64),
        costs=np.asarray(val, dtype=np.float64),
        average_cost=float(np.mean(val)),
    )


def forward_correspondences(M) -> CorrespondenceSet:
    """Each row's cheapest column (lowest index on ties) and the mean of those costs."""
    idx, val = _backend.kernels.row_argmin(_as_values(M))
    return _build(Direction.FORWARD, idx, val)


def backward_correspondences(M) -> CorrespondenceSet:
    """Each column's cheapest row (lowest index on ties) and the mean of those costs."""
    idx, val = _backend.kernels.col_argmin(_as_values(M))
    return _build(Direction.BACKWARD, idx, val)


def bidirectional_cost(M) -> float:
    """Mean of the unpruned forward and backward average match costs."""
    v = _as_values(M)
    return 0.5 * (forward_correspondences(v).average_cost
                  + backward_correspondences(v).average_cost)


@dataclass(frozen=True, eq=False)
class PrunedCorrespondenceSet:
    parent: CorrespondenceSet
    kept_mask: np.ndarray
    threshold: float
    pruned_average_cost: float

    @property
    def direction(self):
        return self.parent.direction

    @property
    def kept_count(self):
        return int(self.kept_mask.sum())

    @property
    def total(self):
        return len(self.parent)

    @property
    def source(self):
        return self.parent.source[self.kept_mask]

    @property
    def target(self):
        return self.parent.target[self.kept_mask]

    @property
    def costs(self):
        return self.parent.costs[self.kept_mask]

    @property
    def kept(self):
        return [p for p, k in zip(self.parent.pairs, self.kept_mask) if k]

    def mapping(self):
        """The pruned map as a dict: kept source index -> target index."""
        return dict(zip(self.source.tolist(), self.target.tolist()))

    def is_injective(self):
        t = self.target
        return len(np.unique(t)) == len(t)

    def to_json_dict(self):
        p, q = self.parent.p_q_indices()
        m = self.kept_mask
        return {
            "threshold": self.threshold,
            "kept": [
                {"p": int(i), "q": int(j), "cost": float(c)}
                for i, j, c in zip(p[m], q[m], self.parent.costs[m])
            ],
            "kept_count": self.kept_count,
            "pruned_average_cost": self.pruned_average_cost,
        }


def prune(cs: CorrespondenceSet, bins: Optional[int] = None) -> PrunedCorrespondenceSet:
    """Keep the low-cost Otsu class of ``cs``'s match costs."""
    if len(cs) == 0:
        raise EmptyMatrix("nothing to prune")
    res = otsu_threshold(cs.costs, bins)
    mask = cs.costs <= res.threshold
    assert mask.any(), "otsu low class must be nonempty"
    mask.setflags(write=False)
    return PrunedCorrespondenceSet(
        parent=cs,
        kept_mask=mask,
        threshold=res.threshold,
        pruned_average_cost=float(np.mean(cs.costs[mask])),
    )


def keep_all(cs: CorrespondenceSet) -> PrunedCorrespondenceSet:
    """A pruned view that keeps every pair (pruning switched off)."""
    mask = np.ones(len(cs), dtype=bool)
    mask.setflags(write=False)
    return PrunedCorrespondenceSet(cs, mask, float(cs.costs.max()), cs.average_cost)


def select_direction(pruned_fwd: PrunedCorrespondenceSet,
                     pruned_bwd: PrunedCorrespondenceSet) -> Direction:
    """Forward unless the pruned backward average is strictly smaller."""
    if pruned_fwd.pruned_average_cost <= pruned_bwd.pruned_average_cost:
        return Direction.FORWARD
    return Direction.BACKWARD
