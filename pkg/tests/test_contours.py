import math

import numpy as np

from vpkit.contours import (
    OutlineEdge,
    Polyline,
    douglas_peucker,
    extract_outlines,
    render_condition,
    sample_training_condition,
    select_vp_aligned_edges,
    trace_contours,
)
from vpkit.geometry import HomogeneousPoint, LineSegment, Point2, segment_vp_deviation


def poly(coords, closed=False):
    return Polyline(points=tuple(Point2(x, y) for x, y in coords), closed=closed)


def chain_distance(p, polyline):
    """Min distance from a point to any segment of the polyline."""
    best = math.inf
    pts = polyline.as_closed_points()
    for a, b in zip(pts, pts[1:]):
        dx, dy = b.x - a.x, b.y - a.y
        len2 = dx * dx + dy * dy
        t = 0.0 if len2 == 0 else min(1.0, max(0.0, ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2))
        best = min(best, math.hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy)))
    return best


class TestTraceContours:
    def test_all_zero_empty(self):
        assert trace_contours(np.zeros((16, 16), dtype=int)) == []

    def test_square_bbox_matches_pixel_extent(self):
        labels = np.zeros((32, 32), dtype=int)
        labels[5:15, 7:17] = 1
        polys = trace_contours(labels)
        assert len(polys) == 1
        p = polys[0]
        assert p.closed
        xs = [pt.x for pt in p.points]
        ys = [pt.y for pt in p.points]
        assert (min(xs), max(xs)) == (7.0, 16.0)
        assert (min(ys), max(ys)) == (5.0, 14.0)

    def test_two_disjoint_squares_same_label(self):
        labels = np.zeros((40, 40), dtype=int)
        labels[2:10, 2:10] = 3
        labels[20:30, 20:30] = 3
        assert len(trace_contours(labels)) == 2

    def test_small_components_dropped(self):
        labels = np.zeros((16, 16), dtype=int)
        labels[3:6, 3:8] = 1  # 15 px < 16
        assert trace_contours(labels) == []

    def test_closed_representation_repeats_first_vertex(self):
        labels = np.zeros((24, 24), dtype=int)
        labels[4:12, 4:12] = 1
        p = trace_contours(labels)[0]
        cp = p.as_closed_points()
        assert cp[0] == cp[-1]
        # consecutive vertices distinct in the open representation
        for a, b in zip(p.points, p.points[1:]):
            assert (a.x, a.y) != (b.x, b.y)

    def test_ccw_orientation(self):
        labels = np.zeros((24, 24), dtype=int)
        labels[4:12, 4:12] = 1
        p = trace_contours(labels)[0]
        area = 0.0
        pts = p.points
        for i in range(len(pts)):
            a, b = pts[i], pts[(i + 1) % len(pts)]
            area += a.x * b.y - b.x * a.y
        assert area > 0

    def test_multiple_labels(self):
        labels = np.zeros((30, 30), dtype=int)
        labels[2:8, 2:10] = 1
        labels[15:25, 12:22] = 2
        assert len(trace_contours(labels)) == 2


class TestDouglasPeucker:
    def test_collinear_dropped(self):
        out = douglas_peucker(poly([(0, 0), (5, 0), (10, 0)]), 0.1)
        assert [(p.x, p.y) for p in out.points] == [(0, 0), (10, 0)]

    def test_epsilon_boundary(self):
        line = poly([(0, 0), (1, 0.1), (2, 0)])
        kept = douglas_peucker(line, 0.05)
        assert len(kept.points) == 3
        dropped = douglas_peucker(line, 0.2)
        assert len(dropped.points) == 2

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            n = rng.integers(4, 40)
            pts = np.cumsum(rng.uniform(-3, 3, (n, 2)), axis=0)
            pts = [(float(x), float(y)) for x, y in pts]
            try:
                line = poly(pts)
            except ValueError:
                continue
            once = douglas_peucker(line, 1.5)
            twice = douglas_peucker(once, 1.5)
            assert once == twice

    def test_error_bound_exact_predicate(self):
        rng = np.random.default_rng(1)
        for trial in range(200):
            n = int(rng.integers(3, 60))
            closed = bool(rng.random() < 0.4)
            pts = np.cumsum(rng.uniform(-4, 4, (n, 2)), axis=0)
            coords = [(float(x), float(y)) for x, y in pts]
            try:
                line = poly(coords, closed=closed)
            except ValueError:
                continue
            eps = float(rng.uniform(0.2, 5.0))
            simple = douglas_peucker(line, eps)
            for p in line.points:
                assert chain_distance(p, simple) <= eps

    def test_endpoints_preserved_open(self):
        line = poly([(0, 0), (3, 4), (6, -2), (9, 9)])
        out = douglas_peucker(line, 100.0)
        assert out.points[0] == line.points[0]
        assert out.points[-1] == line.points[-1]


class TestSelectVpAlignedEdges:
    def square(self):
        return poly([(0, 0), (10, 0), (10, 10), (0, 10)], closed=True)

    def test_horizontal_infinity_selects_horizontal_edges(self):
        edges = select_vp_aligned_edges(
            [self.square()], [HomogeneousPoint(1, 0, 0)], math.radians(5)
        )
        assert len(edges) == 2
        for e in edges:
            assert e.seg.p0.y == e.seg.p1.y

    def test_wide_threshold_selects_all(self):
        # near-saturation: a square tilted 1 degree puts every edge within
        # 89.9 degrees of a horizontal VP (an exactly axis-aligned square
        # would leave its vertical edges at exactly 90 degrees, which no
        # valid threshold can admit)
        ang = math.radians(1.0)
        c, s = math.cos(ang), math.sin(ang)
        pts = [(0, 0), (10 * c, 10 * s), (10 * c - 10 * s, 10 * s + 10 * c), (-10 * s, 10 * c)]
        tilted = poly(pts, closed=True)
        edges = select_vp_aligned_edges([tilted], [HomogeneousPoint(1, 0, 0)], math.radians(89.9))
        assert len(edges) == 4

    def test_edge_through_vp_zero_deviation(self):
        # VP on the extension of the bottom edge
        edges = select_vp_aligned_edges(
            [self.square()], [HomogeneousPoint(100, 0, 1)], math.radians(5)
        )
        devs = [e for e in edges if e.seg.p0.y == 0 and e.seg.p1.y == 0]
        assert devs and all(e.deviation < 1e-12 for e in devs)

    def test_soundness(self):
        rng = np.random.default_rng(2)
        vps = [HomogeneousPoint(30, -10, 1), HomogeneousPoint(0, 1, 0)]
        for _ in range(20):
            pts = np.cumsum(rng.uniform(-8, 8, (10, 2)), axis=0)
            try:
                line = poly([(float(x), float(y)) for x, y in pts])
            except ValueError:
                continue
            theta = float(rng.uniform(0.05, 1.0))
            for e in select_vp_aligned_edges([line], vps, theta):
                assert segment_vp_deviation(e.seg, vps[e.vp_index]) <= theta


class TestRenderCondition:
    def edge(self, x0, y0, x1, y1):
        return OutlineEdge(
            seg=LineSegment(Point2(x0, y0), Point2(x1, y1)), vp_index=0, deviation=0.0
        )

    def test_empty_all_zero(self):
        assert render_condition([], 16, 16).sum() == 0

    def test_horizontal_exact_pixels(self):
        bm = render_condition([self.edge(2, 5, 8, 5)], 16, 16, line_width=1)
        assert bm.sum() == 7
        assert bm[5, 2:9].all()

    def test_out_of_bounds_clipped(self):
        bm = render_condition([self.edge(100, 100, 140, 120)], 16, 16)
        assert bm.sum() == 0

    def test_deterministic_golden(self):
        edges = [self.edge(1, 1, 12, 9), self.edge(3, 14, 14, 2)]
        a = render_condition(edges, 16, 16, line_width=2)
        b = render_condition(edges, 16, 16, line_width=2)
        assert np.array_equal(a, b)


class TestSampling:
    def make_edges(self, n):
        return [
            OutlineEdge(LineSegment(Point2(i, 0), Point2(i + 1, 1)), 0, 0.0) for i in range(n)
        ]

    def test_keep_all(self):
        edges = self.make_edges(20)
        assert sample_training_condition(edges, 1.0, 0) == edges

    def test_keep_none(self):
        assert sample_training_condition(self.make_edges(20), 0.0, 0) == []

    def test_binomial_bounds(self):
        edges = self.make_edges(1000)
        kept = sample_training_condition(edges, 0.3, 12345)
        assert 240 <= len(kept) <= 360

    def test_deterministic_and_order_preserving(self):
        edges = self.make_edges(100)
        a = sample_training_condition(edges, 0.5, 7)
        b = sample_training_condition(edges, 0.5, 7)
        assert a == b
        idx = [edges.index(e) for e in a]
        assert idx == sorted(idx)


class TestExtractOutlines:
    def test_square_map_end_to_end(self):
        labels = np.zeros((64, 64), dtype=int)
        labels[10:40, 12:52] = 1
        vps = [HomogeneousPoint(1, 0, 0)]
        edges = extract_outlines(labels, vps, dp_epsilon=1.0, theta=math.radians(5))
        assert len(edges) == 2  # top and bottom edges of the rectangle
        for e in edges:
            assert abs(e.seg.p0.y - e.seg.p1.y) < 1.0
