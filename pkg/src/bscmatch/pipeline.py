"""Iterated shape-context / thin-plate-spline matching and kNN classification."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .correspondence import (
    Direction,
    PrunedCorrespondenceSet,
    backward_correspondences,
    forward_correspondences,
    keep_all,
    prune,
    select_direction,
)
from .descriptor import ShapeContextParams, compute_descriptors, cost_matrix
from .errors import DegenerateShape, EmptyGallery
from .tps import DEFAULT_LAMBDA_SCALE, TpsConstraints, TpsModel, default_lambda, fit_tps, warp_shape
from .shapes import Shape

MAX_CONTROL_POINTS = 100


@dataclass(frozen=True)
class PipelineConfig:
    iterations: int = 3
    tps_sample_count: Optional[int] = None  # None: min(kept, MAX_CONTROL_POINTS)
    lambda_scale: float = DEFAULT_LAMBDA_SCALE  # lambda = lambda_scale * (mean control distance)^2
    sc_params: ShapeContextParams = field(default_factory=ShapeContextParams)
    prune: bool = True
    otsu_bins: Optional[int] = None
    max_points: Optional[int] = None  # engineering cap; off by default

    def __post_init__(self):
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.tps_sample_count is not None and self.tps_sample_count < 3:
            raise ValueError("tps_sample_count must be >= 3")
        if self.lambda_scale < 0:
            raise ValueError("lambda_scale must be >= 0")


@dataclass(frozen=True)
class IterationRecord:
    direction: Direction
    bidirectional_cost: float
    pruned_forward_cost: float
    pruned_backward_cost: float
    kept_forward: int
    kept_backward: int

    def to_json_dict(self):
        d = asdict(self)
        d["direction"] = self.direction.value
        return d


@dataclass(frozen=True, eq=False)
class MatchResult:
    score: float
    per_iteration: tuple
    final_correspondences: PrunedCorrespondenceSet
    final_direction: Direction
    warp_models: tuple
    warped_p: Shape
    warped_q: Shape

    def to_json_dict(self):
        return {
            "score": self.score,
            "direction": self.final_direction.value,
            "per_iteration": [r.to_json_dict() for r in self.per_iteration],
            "final_correspondences": self.final_correspondences.parent.to_json_dict(
                self.final_correspondences),
            "warp_models": [m.to_json_dict() for m in self.warp_models],
        }

    def to_json(self, **kw):
        return json.dumps(self.to_json_dict(), **kw)


@dataclass(frozen=True, eq=False)
class _Pass:
    bidirectional_cost: float
    fwd: PrunedCorrespondenceSet
    bwd: PrunedCorrespondenceSet
    direction: Direction

    @property
    def chosen(self):
        return self.fwd if self.direction is Direction.FORWARD else self.bwd


def _sc_pass(p: Shape, q: Shape, cfg: PipelineConfig) -> _Pass:
    M = cost_matrix(compute_descriptors(p, cfg.sc_params), compute_descriptors(q, cfg.sc_params))
    f = forward_correspondences(M)
    b = backward_correspondences(M)
    if cfg.prune:
        pf, pb = prune(f, cfg.otsu_bins), prune(b, cfg.otsu_bins)
    else:
        pf, pb = keep_all(f), keep_all(b)
    cost = 0.5 * (f.average_cost + b.average_cost)
    return _Pass(cost, pf, pb, select_direction(pf, pb))


def subsample_by_index(count, n):
    """``n`` indices spread evenly over ``range(count)``."""
    if n >= count:
        return np.arange(count)
    return (np.arange(n) * count) // n


def _control_pairs(ps: _Pass, cfg: PipelineConfig):
    chosen = ps.chosen
    if chosen.kept_count >= 3:
        src, dst = chosen.source, chosen.target
    else:
        # too few good matches to pin a spline; fall back to every match
        src, dst = chosen.parent.source, chosen.parent.target
    n = cfg.tps_sample_count or MAX_CONTROL_POINTS
    idx = subsample_by_index(len(src), min(len(src), n))
    return src[idx], dst[idx]


def _prepare(s: Shape, cfg: PipelineConfig) -> Shape:
    s = s.deduplicated()
    if len(s) < 3:
        raise DegenerateShape(f"shape needs at least 3 distinct points, got {len(s)}")
    if cfg.max_points is not None and len(s) > cfg.max_points:
        keep = subsample_by_index(len(s), cfg.max_points)
        s = Shape.from_points(s.points[keep], s.label)
    return s


def match_shapes(p: Shape, q: Shape, cfg: PipelineConfig = PipelineConfig()) -> MatchResult:
    """Run ``cfg.iterations`` rounds of correspondence + TPS warp, then score.

    Each round warps the source side of the chosen direction (P for forward,
    Q for backward) toward the other shape using only pruned correspondences.
    The score is the unpruned bidirectional cost of a final pass with no warp
    after it.
    """
    p, q = _prepare(p, cfg), _prepare(q, cfg)
    records, models = [], []
    for _ in range(cfg.iterations):
        ps = _sc_pass(p, q, cfg)
        records.append(IterationRecord(
            ps.direction, ps.bidirectional_cost,
            ps.fwd.pruned_average_cost, ps.bwd.pruned_average_cost,
            ps.fwd.kept_count, ps.bwd.kept_count,
        ))
        src_idx, dst_idx = _control_pairs(ps, cfg)
        if ps.direction is Direction.FORWARD:
            moving, fixed = p, q
        else:
            moving, fixed = q, p
        src = moving.points[src_idx]
        model = fit_tps(TpsConstraints(src, fixed.points[dst_idx]),
                        default_lambda(src, cfg.lambda_scale))
        models.append(model)
        warped = warp_shape(model, moving)
        if ps.direction is Direction.FORWARD:
            p = warped
        else:
            q = warped

    final = _sc_pass(p, q, cfg)
    return MatchResult(
        score=final.bidirectional_cost,
        per_iteration=tuple(records),
        final_correspondences=final.chosen,
        final_direction=final.direction,
        warp_models=tuple(models),
        warped_p=p,
        warped_q=q,
    )


def classify_knn(query: Shape, gallery: Sequence[Shape], k: int = 1,
                 cfg: PipelineConfig = PipelineConfig(), scores=None):
    """Majority label among the ``k`` best-scoring gallery shapes.

    Vote ties go to the label with the smaller mean score, then to the label
    seen first in gallery order. ``scores`` may carry precomputed match scores
    aligned with ``gallery``.
    """
    if not gallery:
        raise EmptyGallery("gallery is empty")
    if k < 1:
        raise ValueError("k must be >= 1")
    if scores is None:
        scores = [match_shapes(query, g, cfg).score for g in gallery]
    order = sorted(range(len(gallery)), key=lambda i: (scores[i], i))[:k]
    votes = {}
    for i in order:
        votes.setdefault(gallery[i].label, []).append(scores[i])
    first_seen = {}
    for i, g in enumerate(gallery):
        first_seen.setdefault(g.label, i)
    return min(votes, key=lambda lab: (-len(votes[lab]), float(np.mean(votes[lab])),
                                       first_seen[lab]))


def leave_one_out_accuracy(gallery: Sequence[Shape], k: int = 1,
                           cfg: PipelineConfig = PipelineConfig()) -> float:
    n = len(gallery)
    hits = 0
    for i in range(n):
        rest = [g for j, g in enumerate(gallery) if j != i]
        if classify_knn(gallery[i], rest, k, cfg) == gallery[i].label:
            hits += 1
    return hits / n


# --- SVG -------------------------------------------------------------------------

def correspondence_svg(p: Shape, q: Shape, pruned: PrunedCorrespondenceSet,
                       size=480, margin=20) -> str:
    """Both shapes with correspondence lines: kept solid, dropped dashed."""
    pts = np.vstack([p.points, q.points])
    lo = pts.min(axis=0)
    span = float((pts.max(axis=0) - lo).max()) or 1.0
    scale = (size - 2 * margin) / span

    def xy(pt):
        return margin + (pt[0] - lo[0]) * scale, margin + (pt[1] - lo[1]) * scale

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">',
           "<style>.shape-a{fill:none;stroke:#1f77b4}.shape-b{fill:none;stroke:#d62728}"
           ".kept{stroke:#2ca02c}.dropped{stroke:#7f7f7f;stroke-dasharray:3,3}</style>"]
    for cls, s in (("shape-a", p), ("shape-b", q)):
        for c in s.contours:
            coords = " ".join("%.2f,%.2f" % xy(v) for v in c.points)
            tag = "polygon" if c.closed else "polyline"
            out.append(f'<{tag} class="{cls}" points="{coords}"/>')
    pi, qi = pruned.parent.p_q_indices()
    for a, b, keep in zip(pi, qi, pruned.kept_mask):
        x1, y1 = xy(p.points[a])
        x2, y2 = xy(q.points[b])
        cls = "kept" if keep else "dropped"
        out.append(f'<line class="{cls}" x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def with_overrides(cfg: PipelineConfig, **kw) -> PipelineConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
