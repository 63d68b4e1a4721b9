"""Thin-plate-spline interpolation between 2-D point sets.

The spline is fitted to the displacements ``target - source`` and applied as
``p + displacement(p)``. The two formulations give the same map, but fitting
displacements means an identity constraint set yields an exactly zero
displacement field, so warping by it returns the input coordinates unchanged.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from .errors import LengthMismatch, SingularSystem
from .shapes import Point2, Shape, mean_pairwise_distance

PIVOT_RTOL = 1e-12
DEFAULT_LAMBDA_SCALE = 1e-3


def tps_kernel(r2):
    """U as a function of squared distance: r^2 log r^2, with U(0) = 0."""
    r2 = np.asarray(r2, dtype=np.float64)
    out = np.zeros_like(r2)
    nz = r2 > 0
    out[nz] = r2[nz] * np.log(r2[nz])
    return out


def _sqdist(a, b):
    d = a[:, None, :] - b[None, :, :]
    return np.einsum("ijk,ijk->ij", d, d)


@dataclass(frozen=True)
class TpsConstraints:
    source: np.ndarray
    target: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.source, dtype=np.float64).reshape(-1, 2)
        t = np.asarray(self.target, dtype=np.float64).reshape(-1, 2)
        if len(s) != len(t):
            raise LengthMismatch(f"{len(s)} source points vs {len(t)} targets")
        object.__setattr__(self, "source", s)
        object.__setattr__(self, "target", t)

    def __len__(self):
        return len(self.source)


@dataclass(frozen=True, eq=False)
class TpsModel:
    control_points: np.ndarray  # (N, 2)
    kernel_weights: np.ndarray  # (N, 2), one column per output coordinate
    displacement_affine: np.ndarray  # (3, 2): constant, x, y rows of the displacement
    lam: float

    @property
    def affine(self):
        """Affine part of (f_x, f_y): rows are the constant, x and y coefficients."""
        return self.displacement_affine + np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])

    def __call__(self, points):
        return warp_points(self, points)

    def to_json_dict(self):
        return {
            "control_points": self.control_points.tolist(),
            "kernel_weights": self.kernel_weights.tolist(),
            "affine": self.affine.tolist(),
            "lambda": self.lam,
        }

    def to_json(self):
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, d):
        affine = np.array(d["affine"], dtype=np.float64)
        return cls(
            np.array(d["control_points"], dtype=np.float64).reshape(-1, 2),
            np.array(d["kernel_weights"], dtype=np.float64).reshape(-1, 2),
            affine - np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
            float(d["lambda"]),
        )


def default_lambda(source, scale=DEFAULT_LAMBDA_SCALE):
    d = mean_pairwise_distance(source)
    return scale * d * d


def _dedupe_sources(source, target):
    _, first = np.unique(source, axis=0, return_index=True)
    if len(first) == len(source):
        return source, target
    keep = np.sort(first)
    return source[keep], target[keep]


def fit_tps(c: TpsConstraints, lam: float = 0.0) -> TpsModel:
    """Solve the (N+3)x(N+3) TPS system with ``lam`` added to the kernel diagonal.

    Repeated source points are collapsed to their first occurrence.
    """
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    src, dst = _dedupe_sources(c.source, c.target)
    n = len(src)
    if n < 3:
        raise SingularSystem(f"need at least 3 distinct control points, got {n}")

    L = np.zeros((n + 3, n + 3))
    L[:n, :n] = tps_kernel(_sqdist(src, src)) + lam * np.eye(n)
    L[:n, n] = 1.0
    L[:n, n + 1:] = src
    L[n, :n] = 1.0
    L[n + 1:, :n] = src.T
    rhs = np.zeros((n + 3, 2))
    rhs[:n] = dst - src

    with warnings.catch_warnings():
        # singularity is reported below as SingularSystem
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(L, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.min() < PIVOT_RTOL * np.abs(L).max():
        raise SingularSystem("control points are collinear or repeated")
    sol = lu_solve((lu, piv), rhs, check_finite=False)
    return TpsModel(src.copy(), sol[:n], sol[n:], float(lam))


def warp_points(model: TpsModel, points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    U = tps_kernel(_sqdist(pts, model.control_points))
    a = model.displacement_affine
    disp = a[0] + pts @ a[1:] + U @ model.kernel_weights
    return pts + disp


def warp_point(model: TpsModel, p) -> Point2:
    x, y = warp_points(model, [p])[0]
    return Point2(float(x), float(y))


def warp_shape(model: TpsModel, s: Shape) -> Shape:
    return s.with_points(warp_points(model, s.points))


def bending_energy(model: TpsModel) -> float:
    """Sum over both output coordinates of w^T K w."""
    K = tps_kernel(_sqdist(model.control_points, model.control_points))
    w = model.kernel_weights
    return float(np.einsum("ik,ij,jk->", w, K, w))
