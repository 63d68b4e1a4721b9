"""One-to-one assignment baseline, synthetic shapes and the scaling benchmark."""
from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from . import _backend
from .correspondence import backward_correspondences, forward_correspondences
from .descriptor import CostMatrix, ShapeContextParams, compute_descriptors, cost_matrix
from .errors import BadParams, NonSquare
from .shapes import Contour, Shape

FAMILIES = ("circle", "square", "star", "blob", "multi_contour_glyph")
ALGORITHMS = ("bsc", "hungarian")

STAR_OUTER = 1.0
STAR_INNER = 0.4
STAR_TIPS = 5


@dataclass(frozen=True)
class Assignment:
    permutation: np.ndarray
    total_cost: float


def hungarian(M) -> Assignment:
    """Minimum-cost perfect assignment of a square cost matrix."""
    v = M.values if isinstance(M, CostMatrix) else np.asarray(M, dtype=np.float64)
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise NonSquare(f"hungarian needs a square matrix, got {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("cost matrix entries must be finite")
    n = v.shape[0]
    if n == 0:
        return Assignment(np.empty(0, dtype=np.int64), 0.0)
    perm = _backend.kernels.hungarian(np.ascontiguousarray(v))
    total = float(sum(v[i, perm[i]] for i in range(n)))
    return Assignment(perm, total)


# --- synthetic shapes ------------------------------------------------------------

def _polygon_samples(vertices, count):
    """``count`` points evenly spaced by arc length around a closed polygon."""
    v = np.asarray(vertices, dtype=np.float64)
    seg = np.roll(v, -1, axis=0) - v
    lengths = np.hypot(seg[:, 0], seg[:, 1])
    cum = np.concatenate(([0.0], np.cumsum(lengths)))
    s = np.arange(count) * (cum[-1] / count)
    k = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(v) - 1)
    frac = (s - cum[k]) / lengths[k]
    return v[k] + frac[:, None] * seg[k]


def _radial_jitter(pts, jitter, rng):
    if jitter == 0:
        return pts
    r = np.hypot(pts[:, 0], pts[:, 1])
    dr = rng.uniform(-jitter, jitter, len(pts))
    return pts * ((r + dr) / r)[:, None]


def _star_vertices():
    ang = np.pi / 2 + np.arange(2 * STAR_TIPS) * np.pi / STAR_TIPS
    rad = np.where(np.arange(2 * STAR_TIPS) % 2 == 0, STAR_OUTER, STAR_INNER)
    return np.c_[rad * np.cos(ang), rad * np.sin(ang)]


def generate_shape(family: str, point_count: int, jitter: float = 0.0, seed: int = 0) -> Shape:
    """Deterministic synthetic outline with ``point_count`` boundary points.

    Shapes have unit outer radius; ``jitter`` is the half-width of uniform
    radial noise in those units.
    """
    if family not in FAMILIES:
        raise BadParams(f"unknown family {family!r}")
    if point_count < 3 or (family == "multi_contour_glyph" and point_count < 6):
        raise BadParams(f"point_count too small: {point_count}")
    if jitter < 0:
        raise BadParams("jitter must be >= 0")
    rng = np.random.default_rng(seed)

    if family == "circle":
        t = np.arange(point_count) * (2 * np.pi / point_count)
        pts = np.c_[np.cos(t), np.sin(t)]
    elif family == "square":
        pts = _polygon_samples([(-1, -1), (1, -1), (1, 1), (-1, 1)], point_count)
    elif family == "star":
        pts = _polygon_samples(_star_vertices(), point_count)
    elif family == "blob":
        t = np.arange(point_count) * (2 * np.pi / point_count)
        r = np.ones(point_count)
        for k in range(2, 6):
            r += rng.uniform(0.0, 0.15) * np.cos(k * t + rng.uniform(0, 2 * np.pi))
        pts = np.c_[r * np.cos(t), r * np.sin(t)]
    else:
        # ring glyph: outer circle plus a hole, points split by perimeter
        n_out = max(3, int(round(point_count * 2 / 3)))
        n_in = point_count - n_out
        t_out = np.arange(n_out) * (2 * np.pi / n_out)
        t_in = np.arange(n_in) * (2 * np.pi / n_in)
        outer = np.c_[np.cos(t_out), np.sin(t_out)]
        inner = 0.5 * np.c_[np.cos(t_in), np.sin(t_in)]
        outer = _radial_jitter(outer, jitter, rng)
        inner = _radial_jitter(inner, jitter, rng)
        return Shape((Contour(outer), Contour(inner[::-1])), family)

    return Shape((Contour(_radial_jitter(pts, jitter, rng)),), family)


def make_gallery(families=("circle", "square", "star"), per_family=10, point_count=60,
                 jitter=0.03, seed=0):
    """Labelled jittered shapes with random scale, translation and start point."""
    rng = np.random.default_rng(seed)
    gallery = []
    for fam in families:
        for _ in range(per_family):
            s = generate_shape(fam, point_count, jitter, int(rng.integers(2**31)))
            pts = np.roll(s.points, int(rng.integers(point_count)), axis=0)
            pts = pts * rng.uniform(0.5, 2.0) + rng.uniform(-10, 10, 2)
            gallery.append(Shape.from_points(pts, label=fam))
    return gallery


# --- benchmark -------------------------------------------------------------------

@dataclass(frozen=True)
class BenchRecord:
    algorithm: str
    size: int
    wall_time: float
    repetitions: int


@dataclass
class BenchReport:
    records: list
    slopes: dict  # algorithm -> fitted exponent, or None with fewer than two sizes

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["algorithm", "size", "wall_time_s", "repetitions"])
        for r in self.records:
            w.writerow([r.algorithm, r.size, f"{r.wall_time:.9g}", r.repetitions])
        return buf.getvalue()

    def summary(self):
        return {"slopes": self.slopes, "sizes": sorted({r.size for r in self.records})}

    def to_json(self):
        return json.dumps(self.summary(), indent=2, sort_keys=True)


def loglog_slope(sizes: Sequence[float], times: Sequence[float]) -> Optional[float]:
    """Least-squares slope of log(time) against log(size)."""
    if len(sizes) < 2:
        return None
    x = np.log(np.asarray(sizes, dtype=np.float64))
    y = np.log(np.asarray(times, dtype=np.float64))
    return float(np.polyfit(x, y, 1)[0])


def bench_pair(size, seed=0):
    """The two shapes timed at ``size``; identical for a given (size, seed)."""
    return (generate_shape("blob", size, 0.02, seed),
            generate_shape("blob", size, 0.02, seed + 1))


def bench_matrix(size, seed=0, params=ShapeContextParams()):
    p, q = bench_pair(size, seed)
    return cost_matrix(compute_descriptors(p, params), compute_descriptors(q, params))


def bsc_correspondence_phase(p, q, params=ShapeContextParams()):
    """Descriptors, cost matrix and both argmin sweeps: the timed BSC work."""
    M = cost_matrix(compute_descriptors(p, params), compute_descriptors(q, params))
    return M, forward_correspondences(M), backward_correspondences(M)


def _min_time(fn, reps):
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_scaling(sizes: Iterable[int], algorithms=ALGORITHMS, repetitions: int = 5,
                  seed: int = 0, sizes_by_algorithm: Optional[dict] = None) -> BenchReport:
    """Time the BSC correspondence phase and/or Hungarian over ``sizes``.

    Both algorithms see the same shape pair and cost matrix at each size.
    ``sizes_by_algorithm`` optionally restricts an algorithm to a subset.
    """
    sizes = list(sizes)
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise BadParams("sizes must be strictly increasing")
    if any(s < 50 for s in sizes):
        raise BadParams("sizes must be >= 50")
    if repetitions < 3:
        raise BadParams("repetitions must be >= 3")
    algorithms = list(algorithms)
    for a in algorithms:
        if a not in ALGORITHMS:
            raise BadParams(f"unknown algorithm {a!r}")
    sizes_by_algorithm = sizes_by_algorithm or {}

    # Repetitions are interleaved round-robin over every (size, algorithm)
    # case, so a transient slowdown of the machine cannot bias one size.
    cases = []
    for size in sizes:
        p, q = bench_pair(size, seed)
        M = None
        for algo in algorithms:
            if size not in sizes_by_algorithm.get(algo, sizes):
                continue
            if algo == "bsc":
                fn = (lambda p=p, q=q: bsc_correspondence_phase(p, q))
            else:
                if M is None:
                    M = bsc_correspondence_phase(p, q)[0]
                fn = (lambda M=M: hungarian(M))
            fn()  # warm-up
            cases.append((algo, size, fn))
    best = [float("inf")] * len(cases)
    for _ in range(repetitions):
        for k, (_, _, fn) in enumerate(cases):
            best[k] = min(best[k], _min_time(fn, 1))
    records = [BenchRecord(algo, size, t, repetitions)
               for (algo, size, _), t in zip(cases, best)]

    slopes = {}
    for algo in algorithms:
        rs = [r for r in records if r.algorithm == algo]
        slopes[algo] = loglog_slope([r.size for r in rs], [r.wall_time for r in rs])
    return BenchReport(records, slopes)


def bench_svg(report: BenchReport, width=480, height=360) -> str:
    """Log-log plot of the benchmark records."""
    recs = report.records
    if not recs:
        return f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}"/>\n'
    lx = np.log10([r.size for r in recs])
    ly = np.log10([r.wall_time for r in recs])
    pad = 40

    def sx(v):
        span = (lx.max() - lx.min()) or 1.0
        return pad + (v - lx.min()) / span * (width - 2 * pad)

    def sy(v):
        span = (ly.max() - ly.min()) or 1.0
        return height - pad - (v - ly.min()) / span * (height - 2 * pad)

    colors = {"bsc": "#1f77b4", "hungarian": "#d62728"}
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>']
    for k, algo in enumerate(sorted({r.algorithm for r in recs})):
        rs = [(sx(np.log10(r.size)), sy(np.log10(r.wall_time)))
              for r in recs if r.algorithm == algo]
        pts = " ".join(f"{x:.1f},{y:.1f}" for x, y in rs)
        c = colors.get(algo, "black")
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{c}"/>')
        slope = report.slopes.get(algo)
        text = f"{algo}: slope {slope:.2f}" if slope is not None else algo
        parts.append(f'<text x="{pad}" y="{20 + 16 * k}" fill="{c}" font-size="12">{text}</text>')
    parts.append(f'<text x="{width / 2:.0f}" y="{height - 8}" font-size="11">log10 size</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
