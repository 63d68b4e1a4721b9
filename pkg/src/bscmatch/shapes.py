"""Shape containers, PGM loading, border following and point-file I/O.

A :class:`Shape` is an ordered collection of contours. Each contour keeps its
points as a read-only ``(k, 2)`` float array in boundary traversal order, with
``x`` the column and ``y`` the row for shapes extracted from images.
"""
from __future__ import annotations

import json
from importlib import resources
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy import ndimage
from scipy.spatial.distance import pdist

from .errors import (
    DegenerateShape,
    EmptyShape,
    MalformedHeader,
    ParseError,
    TruncatedData,
)

DEFAULT_THRESHOLD = 128


class Point2(NamedTuple):
    x: float
    y: float


def _frozen(a):
    a = np.array(a, dtype=np.float64, copy=True).reshape(-1, 2)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Contour:
    """Ordered boundary points. Consecutive repeats are collapsed on construction."""

    points: np.ndarray
    closed: bool = True

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, 2)
        if len(pts) == 0:
            raise EmptyShape("contour needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise ValueError("contour coordinates must be finite")
        if len(pts) > 1:
            same = np.all(pts[1:] == pts[:-1], axis=1)
            if same.any():
                pts = pts[np.concatenate(([True], ~same))]
        object.__setattr__(self, "points", _frozen(pts))

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        if not isinstance(other, Contour):
            return NotImplemented
        return self.closed == other.closed and np.array_equal(self.points, other.points)


@dataclass(frozen=True, eq=False)
class Shape:
    contours: tuple
    label: Optional[str] = None
    _points: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        contours = tuple(
            c if isinstance(c, Contour) else Contour(c) for c in self.contours
        )
        object.__setattr__(self, "contours", contours)
        if contours:
            pts = np.concatenate([c.points for c in contours])
        else:
            pts = np.empty((0, 2))
        object.__setattr__(self, "_points", _frozen(pts))

    @classmethod
    def from_points(cls, points, label=None, closed=True):
        """Single-contour shape from an ``(m, 2)`` array."""
        return cls((Contour(points, closed),), label)

    @property
    def points(self) -> np.ndarray:
        """All contour points stacked in order, shape ``(m, 2)``."""
        return self._points

    def __len__(self):
        return len(self._points)

    def __eq__(self, other):
        if not isinstance(other, Shape):
            return NotImplemented
        return self.label == other.label and self.contours == other.contours

    def contour_sizes(self):
        return [len(c) for c in self.contours]

    def with_points(self, points) -> "Shape":
        """Same contour structure, new coordinates (one row per existing point)."""
        points = np.asarray(points, dtype=np.float64)
        if points.shape != self._points.shape:
            raise ValueError(
                f"expected {self._points.shape} coordinates, got {points.shape}"
            )
        out, start = [], 0
        for c in self.contours:
            out.append(Contour(points[start:start + len(c)], c.closed))
            start += len(c)
        return Shape(tuple(out), self.label)

    def translated(self, dx, dy) -> "Shape":
        return self.with_points(self._points + np.array([dx, dy]))

    def scaled(self, factor) -> "Shape":
        return self.with_points(self._points * factor)

    def deduplicated(self) -> "Shape":
        """Drop exact repeats of earlier points across all contours (first one wins)."""
        seen = set()
        out = []
        for c in self.contours:
            keep = []
            for x, y in c.points:
                key = (float(x), float(y))
                if key not in seen:
                    seen.add(key)
                    keep.append(key)
            if keep:
                out.append(Contour(keep, c.closed))
        if len(out) == len(self.contours) and all(
            len(a) == len(b) for a, b in zip(out, self.contours)
        ):
            return self
        return Shape(tuple(out), self.label)

    def to_json_dict(self):
        return {
            "contours": [c.points.tolist() for c in self.contours],
            "label": self.label,
        }

    @classmethod
    def from_json_dict(cls, d):
        return cls(tuple(Contour(c) for c in d["contours"]), d.get("label"))

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json(cls, text) -> "Shape":
        return cls.from_json_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class BinaryImage:
    width: int
    height: int
    pixels: np.ndarray  # uint8, row-major

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image dimensions must be positive")
        px = np.asarray(self.pixels, dtype=np.uint8).ravel()
        if px.size != self.width * self.height:
            raise ValueError(
                f"expected {self.width * self.height} pixels, got {px.size}"
            )
        px = px.copy()
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    def as_array(self) -> np.ndarray:
        return self.pixels.reshape(self.height, self.width)

    @classmethod
    def from_array(cls, arr):
        arr = np.asarray(arr)
        return cls(arr.shape[1], arr.shape[0], arr.ravel())


# --- PGM ---------------------------------------------------------------------

def _header_tokens(data: bytes, count: int):
    """Read ``count`` whitespace-separated header tokens, skipping ``#`` comments.

    Returns the tokens and the offset just past the single whitespace byte
    that terminates the last token.
    """
    tokens, pos, n = [], 0, len(data)
    while len(tokens) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos >= n:
            raise MalformedHeader("header ended early")
        if data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        tokens.append(data[start:pos])
    return tokens, pos + 1


def load_pgm(data: bytes) -> BinaryImage:
    """Decode a P2 (ASCII) or P5 (binary) graymap.

    Values are rescaled to 0..255 when the declared maxval is not 255.
    """
    if isinstance(data, str):
        data = data.encode("ascii")
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise MalformedHeader(f"unsupported magic {magic!r}")
    try:
        tokens, offset = _header_tokens(data[2:], 3)
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise MalformedHeader(str(exc)) from None
    offset += 2
    if width <= 0 or height <= 0:
        raise MalformedHeader(f"bad dimensions {width}x{height}")
    if not 0 < maxval < 65536:
        raise MalformedHeader(f"bad maxval {maxval}")
    count = width * height

    if magic == b"P2":
        try:
            values = [int(t) for t in data[offset:].split()[:count]]
        except ValueError:
            raise TruncatedData("non-integer pixel value") from None
        if len(values) < count:
            raise TruncatedData(f"expected {count} pixels, got {len(values)}")
        raw = np.array(values, dtype=np.int64)
    else:
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        body = data[offset:offset + count * dtype.itemsize]
        if len(body) < count * dtype.itemsize:
            raise TruncatedData(
                f"expected {count * dtype.itemsize} bytes, got {len(body)}"
            )
        raw = np.frombuffer(body, dtype=dtype).astype(np.int64)

    raw = np.clip(raw, 0, maxval)
    if maxval != 255:
        raw = np.rint(raw * (255.0 / maxval)).astype(np.int64)
    return BinaryImage(width, height, raw.astype(np.uint8))


def save_pgm(img: BinaryImage, binary=True) -> bytes:
    header = f"{'P5' if binary else 'P2'}\n{img.width} {img.height}\n255\n".encode()
    if binary:
        return header + img.pixels.tobytes()
    rows = img.as_array()
    body = "\n".join(" ".join(str(v) for v in row) for row in rows)
    return header + body.encode() + b"\n"


# --- border following ----------------------------------------------------------

# Clockwise on screen (row axis points down): N, NE, E, SE, S, SW, W, NW.
_RING = ((-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1))
_RING_INDEX = {d: k for k, d in enumerate(_RING)}


def _moore_trace(mask, start, backtrack):
    """Moore-neighbour tracing with Jacob's stopping criterion.

    ``backtrack`` is a background cell 8-adjacent to ``start``; the trace
    follows the boundary of the background region that cell belongs to.
    Returns (row, col) pairs.
    """
    h, w = mask.shape

    def fg(r, c):
        return 0 <= r < h and 0 <= c < w and mask[r, c]

    out = [start]
    cur, back = start, backtrack
    # every boundary cell is entered at most once per incident background side
    limit = 8 * int(mask.sum()) + 8
    for _ in range(limit):
        k = _RING_INDEX[(back[0] - cur[0], back[1] - cur[1])]
        nxt = None
        for step in range(1, 9):
            dr, dc = _RING[(k + step) % 8]
            if fg(cur[0] + dr, cur[1] + dc):
                nxt = (cur[0] + dr, cur[1] + dc)
                pr, pc = _RING[(k + step - 1) % 8]
                back = (cur[0] + pr, cur[1] + pc)
                break
        if nxt is None:
            return out  # isolated pixel
        cur = nxt
        if cur == start and back == backtrack:
            break
        out.append(cur)
    return out


def _first_pixels(labels, count):
    """Row-major flat index of the first pixel of each label 1..count."""
    flat = labels.ravel()
    uniq, first = np.unique(flat, return_index=True)
    pos = dict(zip(uniq.tolist(), first.tolist()))
    return [pos[k] for k in range(1, count + 1)]


def extract_contours(img: BinaryImage, fg_threshold: int = DEFAULT_THRESHOLD) -> Shape:
    """Outer and hole boundaries of every 8-connected foreground component.

    Components are ordered by their first pixel in row-major scan order; each
    component's outer contour precedes its holes, which are ordered the same
    way. Pixels shared between contours are kept only at first occurrence.
    """
    if not 0 <= fg_threshold <= 255:
        raise ValueError("fg_threshold must be in [0, 255]")
    mask = img.as_array() >= fg_threshold
    if not mask.any():
        raise EmptyShape("no foreground pixel")
    h, w = mask.shape

    fg_labels, n_fg = ndimage.label(mask, structure=np.ones((3, 3), dtype=int))
    bg_labels, n_bg = ndimage.label(~mask)  # 4-connected background

    border = set(np.unique(np.concatenate([
        bg_labels[0], bg_labels[-1], bg_labels[:, 0], bg_labels[:, -1]
    ])).tolist())
    holes = {k: [] for k in range(1, n_fg + 1)}
    for lab, idx in enumerate(_first_pixels(bg_labels, n_bg), start=1):
        if lab in border:
            continue
        r, c = divmod(idx, w)
        # first hole pixel in scan order: the cell above it is foreground
        owner = int(fg_labels[r - 1, c])
        holes[owner].append(((r - 1, c), (r, c)))

    firsts = _first_pixels(fg_labels, n_fg)
    contours = []
    for lab in sorted(range(1, n_fg + 1), key=lambda k: firsts[k - 1]):
        r, c = divmod(firsts[lab - 1], w)
        contours.append(_moore_trace(mask, (r, c), (r, c - 1)))
        for start, back in holes[lab]:
            contours.append(_moore_trace(mask, start, back))

    shape = Shape(tuple(
        Contour([(float(c), float(r)) for r, c in trace]) for trace in contours
    ))
    return shape.deduplicated()


# --- normalisation -------------------------------------------------------------

def mean_pairwise_distance(points) -> float:
    """Mean of the full ``m x m`` distance matrix, zero diagonal included."""
    points = np.asarray(points, dtype=np.float64)
    m = len(points)
    if m < 2:
        return 0.0
    return float(2.0 * pdist(points).sum() / (m * m))


def normalize(shape: Shape) -> Shape:
    """Centre on the centroid and scale to unit mean pairwise distance."""
    pts = shape.points
    if len(pts) < 2:
        raise DegenerateShape("normalize needs at least two points")
    centred = pts - pts.mean(axis=0)
    d = mean_pairwise_distance(centred)
    if d == 0.0:
        raise DegenerateShape("all points coincide")
    return shape.with_points(centred / d)


# --- CSV point files -----------------------------------------------------------

def load_points(text: str) -> Shape:
    """Parse ``x,y`` lines; a blank line starts a new contour.

    An optional leading ``# label: name`` line sets the shape label; other
    ``#`` lines are ignored.
    """
    label = None
    contours, current = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("label:") and label is None and not contours and not current:
                label = body[len("label:"):].strip() or None
            continue
        if not line:
            if current:
                contours.append(current)
                current = []
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(lineno, f"expected 'x,y', got {raw!r}")
        try:
            x, y = float(parts[0]), float(parts[1])
        except ValueError:
            raise ParseError(lineno, f"non-numeric field in {raw!r}") from None
        if not (np.isfinite(x) and np.isfinite(y)):
            raise ParseError(lineno, "coordinates must be finite")
        current.append((x, y))
    if current:
        contours.append(current)
    if not contours:
        raise ParseError(0, "no points")
    return Shape(tuple(Contour(c) for c in contours), label)


def save_points(shape: Shape) -> str:
    lines = []
    if shape.label is not None:
        lines.append(f"# label: {shape.label}")
    for k, c in enumerate(shape.contours):
        if k:
            lines.append("")
        lines.extend(f"{x:.17g},{y:.17g}" for x, y in c.points)
    return "\n".join(lines) + "\n"


def read_shape(path, fg_threshold: int = DEFAULT_THRESHOLD) -> Shape:
    """Load a shape from ``.pgm``, ``.json`` or CSV depending on the suffix."""
    path = str(path)
    if path.lower().endswith(".pgm"):
        with open(path, "rb") as fh:
            return extract_contours(load_pgm(fh.read()), fg_threshold)
    with open(path) as fh:
        text = fh.read()
    if path.lower().endswith(".json"):
        return Shape.from_json(text)
    return load_points(text)


FIXTURES = ("rectangle", "notched_rectangle")


def load_fixture(name: str) -> Shape:
    """One of the point sets bundled under ``bscmatch/data``."""
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; choose from {FIXTURES}")
    text = resources.files("bscmatch").joinpath("data", f"{name}.csv").read_text()
    return load_points(text)


__all__ = [
    "Point2", "Contour", "Shape", "BinaryImage", "load_pgm", "save_pgm",
    "extract_contours", "normalize", "mean_pairwise_distance", "load_points",
    "save_points", "read_shape", "load_fixture",
]
