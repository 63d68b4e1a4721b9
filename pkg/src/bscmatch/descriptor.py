"""Shape-context descriptors and the chi-square cost matrix."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from . import _backend
from .errors import DegenerateShape, LengthMismatch, ParamMismatch
from .shapes import Shape, mean_pairwise_distance


@dataclass(frozen=True)
class ShapeContextParams:
    radial_bins: int = 5
    angular_bins: int = 12
    r_inner: float = 0.125
    r_outer: float = 2.0
    rotation_invariant: bool = False

    def __post_init__(self):
        if self.radial_bins < 2:
            raise ValueError("radial_bins must be >= 2")
        if self.angular_bins < 4:
            raise ValueError("angular_bins must be >= 4")
        if not 0 < self.r_inner < self.r_outer:
            raise ValueError("need 0 < r_inner < r_outer")

    @property
    def n_bins(self):
        return self.radial_bins * self.angular_bins

    def radial_edges(self, mean_distance):
        """Log-spaced bin edges in absolute units, ``radial_bins + 1`` of them."""
        return np.geomspace(self.r_inner, self.r_outer, self.radial_bins + 1) * mean_distance


@dataclass(frozen=True, eq=False)
class DescriptorSet:
    histograms: np.ndarray  # (m, radial_bins * angular_bins) int64
    source_points: np.ndarray
    params: ShapeContextParams
    mean_distance: float

    def __len__(self):
        return len(self.histograms)

    def normalized(self):
        """Histograms scaled to unit mass."""
        h = self.histograms.astype(np.float64)
        tot = h.sum(axis=1, keepdims=True)
        return np.divide(h, tot, out=np.zeros_like(h), where=tot > 0)

    def to_json_dict(self):
        return {
            "m": len(self),
            "params": asdict(self.params),
            "mean_distance": self.mean_distance,
            "histograms": self.histograms.tolist(),
        }


@dataclass(frozen=True, eq=False)
class CostMatrix:
    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValueError("cost matrix must be 2-D")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def rows(self):
        return self.values.shape[0]

    @property
    def cols(self):
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape

    def transpose(self) -> "CostMatrix":
        return CostMatrix(self.values.T)

    def to_json_dict(self):
        return {"m": self.rows, "n": self.cols, "values": self.values.tolist()}

    def to_json(self):
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        v = np.array(d["values"], dtype=np.float64).reshape(d["m"], d["n"])
        return cls(v)


def tangent_angles(shape: Shape) -> np.ndarray:
    """Contour tangent direction at each point by central differences."""
    out = []
    for c in shape.contours:
        p = c.points
        k = len(p)
        if k == 1:
            out.append(np.zeros(1))
            continue
        if c.closed and k > 2:
            t = np.roll(p, -1, axis=0) - np.roll(p, 1, axis=0)
        else:
            t = np.empty_like(p)
            t[1:-1] = p[2:] - p[:-2]
            t[0] = p[1] - p[0]
            t[-1] = p[-1] - p[-2]
        out.append(np.arctan2(t[:, 1], t[:, 0]))
    return np.concatenate(out)


def compute_descriptors(shape: Shape, params: ShapeContextParams = ShapeContextParams()) -> DescriptorSet:
    """Log-polar histogram of the other points, one per point.

    Radii are measured in units of the mean pairwise distance, so the result
    is invariant to translation and uniform scale. Points outside the radial
    range are counted in the nearest end bin; every histogram holds ``m - 1``.
    """
    pts = np.ascontiguousarray(shape.points)
    m = len(pts)
    if m < 3:
        raise DegenerateShape(f"need at least 3 points, got {m}")
    d = mean_pairwise_distance(pts)
    if d == 0.0:
        raise DegenerateShape("all points coincide")
    edges = params.radial_edges(d)[1:-1]
    ref = tangent_angles(shape) if params.rotation_invariant else np.empty(0)
    hist = _backend.kernels.sc_histograms(
        pts, np.ascontiguousarray(edges * edges), params.angular_bins,
        np.ascontiguousarray(ref, dtype=np.float64),
    )
    hist.setflags(write=False)
    return DescriptorSet(hist, pts, params, d)


def chi2_cost(h, g) -> float:
    """Half chi-square distance between two histograms after unit-mass scaling."""
    h = np.asarray(h, dtype=np.float64).ravel()
    g = np.asarray(g, dtype=np.float64).ravel()
    if h.shape != g.shape:
        raise LengthMismatch(f"histogram lengths differ: {h.size} vs {g.size}")
    if h.sum() > 0:
        h = h / h.sum()
    if g.sum() > 0:
        g = g / g.sum()
    t = h + g
    nz = t > 0
    return min(float(0.5 * np.sum((h[nz] - g[nz]) ** 2 / t[nz])), 1.0)


def cost_matrix(dp: DescriptorSet, dq: DescriptorSet) -> CostMatrix:
    """Matrix of chi-square costs, rows indexing ``dp`` points, columns ``dq``."""
    if dp.params != dq.params:
        raise ParamMismatch("descriptor sets were built with different parameters")
    values = _backend.kernels.chi2_matrix(dp.normalized(), dq.normalized())
    np.minimum(values, 1.0, out=values)  # rounding can land a hair above the bound
    return CostMatrix(values)


def shape_cost_matrix(p: Shape, q: Shape, params: ShapeContextParams = ShapeContextParams()) -> CostMatrix:
    return cost_matrix(compute_descriptors(p, params), compute_descriptors(q, params))
