import numpy as np
import pytest

from bscmatch.shapes import Shape


def random_points(rng, m, min_dist=0.0):
    """``m`` uniform points in the unit square, optionally with a minimum spacing."""
    pts = []
    while len(pts) < m:
        c = rng.uniform(0, 1, 2)
        if all(np.hypot(*(c - p)) >= min_dist for p in pts):
            pts.append(c)
    return np.array(pts)


def random_shape(rng, lo=3, hi=50):
    return Shape.from_points(random_points(rng, int(rng.integers(lo, hi + 1))))


def rotate(shape, angle):
    c, s = np.cos(angle), np.sin(angle)
    return shape.with_points(shape.points @ np.array([[c, s], [-s, c]]))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
