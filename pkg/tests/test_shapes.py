import json

import numpy as np
import pytest

from bscmatch.errors import DegenerateShape, EmptyShape, MalformedHeader, ParseError, TruncatedData
from bscmatch.shapes import (
    BinaryImage,
    Contour,
    Shape,
    extract_contours,
    load_fixture,
    load_pgm,
    load_points,
    normalize,
    save_pgm,
    save_points,
)

from conftest import random_shape


def img(rows):
    return BinaryImage.from_array(np.array(rows, dtype=np.uint8))


class TestPgm:
    def test_p2(self):
        im = load_pgm(b"P2\n2 2\n255\n0 255 255 0\n")
        assert (im.width, im.height) == (2, 2)
        assert im.pixels.tolist() == [0, 255, 255, 0]

    def test_p5_matches_p2(self):
        p5 = b"P5\n2 2\n255\n" + bytes([0, 255, 255, 0])
        assert load_pgm(p5).pixels.tolist() == load_pgm(b"P2\n2 2\n255\n0 255 255 0\n").pixels.tolist()

    def test_comments_and_maxval_rescale(self):
        im = load_pgm(b"P2\n# a comment\n3 1\n# another\n15\n0 15 5\n")
        assert im.pixels.tolist() == [0, 255, 85]

    def test_sixteen_bit_p5(self):
        im = load_pgm(b"P5\n2 1\n65535\n" + bytes([0, 0, 255, 255]))
        assert im.pixels.tolist() == [0, 255]

    @pytest.mark.parametrize("data", [b"P3\n1 1\n255\n0 0 0\n", b"XX", b"P2\n0 2\n255\n", b"P2\n2\n"])
    def test_bad_header(self, data):
        with pytest.raises(MalformedHeader):
            load_pgm(data)

    @pytest.mark.parametrize("data", [b"P2\n2 2\n255\n0 1 2\n", b"P5\n2 2\n255\n\x00\x01"])
    def test_truncated(self, data):
        with pytest.raises(TruncatedData):
            load_pgm(data)

    def test_save_roundtrip(self):
        im = img([[0, 10], [200, 255]])
        for binary in (True, False):
            assert load_pgm(save_pgm(im, binary)).pixels.tolist() == im.pixels.tolist()


class TestExtractContours:
    def test_single_pixel(self):
        s = extract_contours(img([[0, 0, 0], [0, 255, 0], [0, 0, 0]]))
        assert len(s.contours) == 1
        assert s.points.tolist() == [[1.0, 1.0]]

    def test_full_3x3(self):
        # hand trace: clockwise from the top-left pixel, (x, y) = (col, row)
        s = extract_contours(img(np.full((3, 3), 255)))
        assert len(s.contours) == 1
        assert s.points.tolist() == [
            [0, 0], [1, 0], [2, 0], [2, 1], [2, 2], [1, 2], [0, 2], [0, 1],
        ]

    def test_empty(self):
        with pytest.raises(EmptyShape):
            extract_contours(img(np.zeros((4, 4))))

    def test_ring_has_hole_contour(self):
        a = np.zeros((7, 7), dtype=np.uint8)
        a[1:6, 1:6] = 255
        a[3, 3] = 0
        s = extract_contours(img(a))
        assert len(s.contours) == 2
        assert len(s.contours[0]) == 16
        # diagonal neighbours of the hole pixel have no background 4-neighbour
        hole = {tuple(p) for p in s.contours[1].points.tolist()}
        assert hole == {(3.0, 2.0), (4.0, 3.0), (3.0, 4.0), (2.0, 3.0)}

    def test_component_order_is_scan_order(self):
        a = np.zeros((5, 8), dtype=np.uint8)
        a[3, 1] = 255          # scanned second
        a[1, 5:7] = 255        # scanned first
        s = extract_contours(img(a))
        assert [c.points[0].tolist() for c in s.contours] == [[5, 1], [1, 3]]

    def test_threshold(self):
        a = np.array([[100, 200], [0, 0]], dtype=np.uint8)
        assert len(extract_contours(img(a), 150)) == 1
        assert len(extract_contours(img(a), 50)) == 2
        with pytest.raises(ValueError):
            extract_contours(img(a), 300)

    @pytest.mark.parametrize("seed", range(25))
    def test_points_on_boundary_and_unique(self, seed):
        rng = np.random.default_rng(seed)
        a = (rng.uniform(size=(12, 15)) > 0.45).astype(np.uint8) * 255
        if not a.any():
            return
        s = extract_contours(img(a))
        mask = a >= 128
        pts = s.points.astype(int)
        assert len({tuple(p) for p in pts.tolist()}) == len(pts)
        for x, y in pts:
            assert mask[y, x]
            nbrs = [(y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)]
            assert any(not (0 <= r < 12 and 0 <= c < 15) or not mask[r, c] for r, c in nbrs)
        # every foreground pixel with a background 4-neighbour is on some contour
        edge = set()
        for y, x in zip(*np.nonzero(mask)):
            nbrs = [(y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)]
            if any(not (0 <= r < 12 and 0 <= c < 15) or not mask[r, c] for r, c in nbrs):
                edge.add((x, y))
        assert {tuple(p) for p in pts.tolist()} == edge

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        a = (rng.uniform(size=(20, 20)) > 0.5).astype(np.uint8) * 255
        assert extract_contours(img(a)) == extract_contours(img(a))


class TestNormalize:
    def test_two_points(self):
        s = normalize(Shape.from_points([(0, 0), (2, 0)]))
        np.testing.assert_allclose(s.points, [[-1, 0], [1, 0]], atol=1e-15)

    def test_degenerate(self):
        with pytest.raises(DegenerateShape):
            normalize(Shape((Contour([(5, 5)]), Contour([(5, 5)]))))
        with pytest.raises(DegenerateShape):
            normalize(Shape.from_points([(1, 1)]))

    @pytest.mark.parametrize("seed", range(20))
    def test_idempotent(self, seed):
        s = normalize(random_shape(np.random.default_rng(seed)))
        np.testing.assert_allclose(normalize(s).points, s.points, atol=1e-12, rtol=0)

    def test_keeps_contours(self):
        s = Shape((Contour([(0, 0), (4, 0), (4, 4)]), Contour([(1, 1), (2, 1)])))
        assert normalize(s).contour_sizes() == [3, 2]


class TestPointFiles:
    def test_single_contour(self):
        s = load_points("0,0\n1,0\n1,1\n")
        assert s.contour_sizes() == [3]

    def test_multi_contour(self):
        s = load_points("0,0\n\n5,5\n6,5\n")
        assert s.contour_sizes() == [1, 2]

    def test_parse_error_line(self):
        with pytest.raises(ParseError) as exc:
            load_points("0,abc\n")
        assert exc.value.line == 1
        with pytest.raises(ParseError) as exc:
            load_points("0,0\n1,1\n2\n")
        assert exc.value.line == 3

    @pytest.mark.parametrize("seed", range(30))
    def test_roundtrip(self, seed):
        rng = np.random.default_rng(seed)
        contours = tuple(
            Contour(rng.normal(scale=10.0 ** rng.integers(-5, 6), size=(rng.integers(1, 20), 2)))
            for _ in range(rng.integers(1, 4))
        )
        s = Shape(contours, "lbl" if seed % 2 else None)
        back = load_points(save_points(s))
        assert back == s
        for a, b in zip(back.contours, s.contours):
            assert a.points.tobytes() == b.points.tobytes()

    def test_json_roundtrip(self):
        s = Shape((Contour([(0.1, 0.2), (1, 2)]), Contour([(3, 4)])), "x")
        d = json.loads(s.to_json())
        assert d == {"contours": [[[0.1, 0.2], [1.0, 2.0]], [[3.0, 4.0]]], "label": "x"}
        assert Shape.from_json(s.to_json()) == s


class TestShape:
    def test_consecutive_duplicates_collapse(self):
        assert len(Contour([(0, 0), (0, 0), (1, 0)])) == 2

    def test_dedup_across_contours(self):
        s = Shape((Contour([(0, 0), (1, 0)]), Contour([(1, 0), (2, 0)]), Contour([(0, 0)])))
        d = s.deduplicated()
        assert d.contour_sizes() == [2, 1]
        assert len({tuple(p) for p in d.points.tolist()}) == len(d)

    def test_immutable(self):
        s = Shape.from_points([(0, 0), (1, 0), (0, 1)])
        with pytest.raises(ValueError):
            s.points[0, 0] = 5

    def test_fixtures(self):
        a, b = load_fixture("rectangle"), load_fixture("notched_rectangle")
        assert (len(a), len(b)) == (120, 132)
        assert (a.label, b.label) == ("rectangle", "notched")
