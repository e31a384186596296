"""Outline extraction from segmentation maps and condition-image tooling.

Pipeline: trace region boundaries from a label map, simplify them to
polygons, keep the polygon edges that point at one of the image's
vanishing points, and rasterize the survivors into a binary condition
image. A seeded Bernoulli subsampler mimics partial user input when
building training conditions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from PIL import Image
from scipy import ndimage

from .errors import DegenerateDirection
from .geometry import HomogeneousPoint, LineSegment, Point2, segment_vp_deviation

MIN_COMPONENT_PX = 16


@dataclass(frozen=True)
class Polyline:
    points: tuple
    closed: bool

    def __post_init__(self):
        if len(self.points) < 2:
            raise ValueError("Polyline needs at least 2 points")
        for a, b in zip(self.points, self.points[1:]):
            if a.x == b.x and a.y == b.y:
                raise ValueError("consecutive polyline points must be distinct")

    def as_closed_points(self) -> tuple:
        """Points with the first vertex repeated at the end when closed."""
        return self.points + (self.points[0],) if self.closed else self.points

    def edges(self):
        pts = self.as_closed_points()
        for a, b in zip(pts, pts[1:]):
            yield LineSegment(a, b)


@dataclass(frozen=True)
class OutlineEdge:
    seg: LineSegment
    vp_index: int
    deviation: float


# Moore neighborhood in clockwise order on screen (x right, y down)
_MOORE = [(0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1)]


def _moore_trace(mask: np.ndarray) -> list:
    """Boundary pixels of one connected component, Moore-neighbor tracing.

    Starts at the first foreground pixel in row-major order with its
    west neighbor as backtrack, walks the Moore neighborhood clockwise,
    and stops on re-entering the start with the initial backtrack
    (Jacob's criterion).
    """
    rows, cols = np.nonzero(mask)
    start = (int(rows[0]), int(cols[0]))
    h, w = mask.shape

    def fg(p):
        return 0 <= p[0] < h and 0 <= p[1] < w and mask[p]

    start_back = (start[0], start[1] - 1)
    boundary = [start]
    cur, back = start, start_back
    limit = 4 * int(mask.sum()) + 8
    for _ in range(limit):
        # scan clockwise starting just after the backtrack position
        off = (back[0] - cur[0], back[1] - cur[1])
        k0 = _MOORE.index(off)
        nxt = None
        prev = back
        for s in range(1, 9):
            cand_off = _MOORE[(k0 + s) % 8]
            cand = (cur[0] + cand_off[0], cur[1] + cand_off[1])
            if fg(cand):
                nxt = cand
                break
            prev = cand
        if nxt is None:
            return boundary  # isolated pixel
        cur, back = nxt, prev
        if cur == start and back == start_back:
            break
        boundary.append(cur)
    return boundary


def _signed_area(points) -> float:
    area = 0.0
    n = len(points)
    for i in range(n):
        a, b = points[i], points[(i + 1) % n]
        area += a.x * b.y - b.x * a.y
    return 0.5 * area


def trace_contours(labels: np.ndarray) -> list:
    """Closed boundary polylines of every labeled region.

    One polyline per 8-connected component per non-zero label; vertices
    at pixel centers; orientation normalized to positive signed area;
    components under 16 px are dropped.
    """
    labels = np.asarray(labels)
    out = []
    for value in sorted(int(v) for v in np.unique(labels) if v != 0):
        comp, n = ndimage.label(labels == value, structure=np.ones((3, 3), dtype=int))
        for idx in range(1, n + 1):
            mask = comp == idx
            if int(mask.sum()) < MIN_COMPONENT_PX:
                continue
            boundary = _moore_trace(mask)
            pts = []
            for r, c in boundary:
                p = Point2(float(c), float(r))
                if pts and pts[-1].x == p.x and pts[-1].y == p.y:
                    continue
                pts.append(p)
            if len(pts) >= 2 and pts[0].x == pts[-1].x and pts[0].y == pts[-1].y:
                pts.pop()
            if len(pts) < 2:
                continue
            if _signed_area(pts) < 0:
                pts.reverse()
            out.append(Polyline(points=tuple(pts), closed=True))
    return out


def _point_segment_dist(p: Point2, a: Point2, b: Point2) -> float:
    dx, dy = b.x - a.x, b.y - a.y
    len2 = dx * dx + dy * dy
    if len2 == 0.0:
        return math.hypot(p.x - a.x, p.y - a.y)
    t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2
    t = min(1.0, max(0.0, t))
    return math.hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy))


def _simplify_chain(pts, eps: float) -> list:
    """Douglas-Peucker on an open chain; returns the kept points."""
    n = len(pts)
    if n <= 2:
        return list(pts)
    keep = [False] * n
    keep[0] = keep[-1] = True
    stack = [(0, n - 1)]
    while stack:
        lo, hi = stack.pop()
        if hi - lo < 2:
            continue
        dmax, imax = -1.0, -1
        for i in range(lo + 1, hi):
            d = _point_segment_dist(pts[i], pts[lo], pts[hi])
            if d > dmax:
                dmax, imax = d, i
        if dmax > eps:
            keep[imax] = True
            stack.append((lo, imax))
            stack.append((imax, hi))
    return [p for p, k in zip(pts, keep) if k]


def douglas_peucker(line: Polyline, epsilon: float) -> Polyline:
    """Classic recursive simplification with guaranteed error bound.

    Every input vertex ends up within epsilon (point-to-segment
    distance) of the simplified chain. Closed polylines are split at
    their two mutually farthest vertices, each half simplified, then
    rejoined.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    pts = list(line.points)
    if not line.closed or len(pts) < 3:
        return Polyline(points=tuple(_simplify_chain(pts, epsilon)), closed=line.closed)
    arr = np.array([(p.x, p.y) for p in pts])
    d2 = ((arr[:, None, :] - arr[None, :, :]) ** 2).sum(axis=2)
    i, j = np.unravel_index(int(np.argmax(d2)), d2.shape)
    i, j = (int(i), int(j)) if i < j else (int(j), int(i))
    first = pts[i : j + 1]
    second = pts[j:] + pts[: i + 1]
    kept = _simplify_chain(first, epsilon)[:-1] + _simplify_chain(second, epsilon)[:-1]
    return Polyline(points=tuple(kept), closed=True)


def select_vp_aligned_edges(polys, vps, theta: float) -> list:
    """Edges of the polylines whose deviation to some VP stays under theta.

    An edge can be selected for several VPs; each hit records the VP
    index and the measured deviation.
    """
    if not 0 < theta < math.pi / 2:
        raise ValueError("theta must be in (0, pi/2)")
    out = []
    for poly in polys:
        for seg in poly.edges():
            for vp_index, vp in enumerate(vps):
                try:
                    dev = segment_vp_deviation(seg, vp)
                except DegenerateDirection:
                    continue
                if dev <= theta:
                    out.append(OutlineEdge(seg=seg, vp_index=vp_index, deviation=dev))
    return out


def _bresenham(x0: int, y0: int, x1: int, y1: int):
    dx = abs(x1 - x0)
    dy = -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    x, y = x0, y0
    while True:
        yield x, y
        if x == x1 and y == y1:
            return
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x += sx
        if e2 <= dx:
            err += dx
            y += sy


def render_condition(edges, width: int, height: int, line_width: int = 1) -> np.ndarray:
    """Rasterize outline edges into a binary (0/1) uint8 bitmap.

    Integer Bresenham traversal, no anti-aliasing, out-of-bounds pixels
    clipped; widths above 1 grow the stroke with a square structuring
    element so goldens stay bit-exact.
    """
    if line_width < 1:
        raise ValueError("line_width must be >= 1")
    bitmap = np.zeros((height, width), dtype=np.uint8)
    for e in edges:
        x0 = int(round(e.seg.p0.x))
        y0 = int(round(e.seg.p0.y))
        x1 = int(round(e.seg.p1.x))
        y1 = int(round(e.seg.p1.y))
        for x, y in _bresenham(x0, y0, x1, y1):
            if 0 <= x < width and 0 <= y < height:
                bitmap[y, x] = 1
    if line_width > 1:
        struct = np.ones((line_width, line_width), dtype=bool)
        bitmap = ndimage.binary_dilation(bitmap.astype(bool), structure=struct).astype(np.uint8)
    return bitmap


def sample_training_condition(edges, keep_prob: float, rng_seed: int) -> list:
    """Seeded Bernoulli retention per edge, order preserved."""
    if not 0.0 <= keep_prob <= 1.0:
        raise ValueError("keep_prob must be in [0, 1]")
    rng = np.random.default_rng(rng_seed)
    draws = rng.random(len(edges))
    return [e for e, d in zip(edges, draws) if d < keep_prob]


# ---------------------------------------------------------------------------
# file formats


def load_segmentation_png(path) -> np.ndarray:
    img = Image.open(path)
    if img.mode not in ("L", "I", "I;16", "P"):
        img = img.convert("L")
    return np.asarray(img, dtype=np.int64)


def load_vps_json(path) -> list:
    with open(path) as f:
        d = json.load(f)
    return [HomogeneousPoint(float(x), float(y), float(w)) for x, y, w in d["vps"]]


def outlines_to_json_dict(edges) -> list:
    return [
        {
            "p0": [e.seg.p0.x, e.seg.p0.y],
            "p1": [e.seg.p1.x, e.seg.p1.y],
            "vp_index": e.vp_index,
            "deviation_deg": math.degrees(e.deviation),
        }
        for e in edges
    ]


def save_outlines_json(path, edges) -> None:
    with open(path, "w") as f:
        json.dump(outlines_to_json_dict(edges), f, indent=2, sort_keys=True)
        f.write("\n")


def save_condition_png(path, bitmap: np.ndarray) -> None:
    Image.fromarray((bitmap > 0).astype(np.uint8) * 255, mode="L").save(path, format="PNG")


def extract_outlines(
    labels: np.ndarray,
    vps,
    dp_epsilon: float = 2.0,
    theta: float = math.radians(5.0),
) -> list:
    """Full per-image pipeline: contours, simplification, VP selection."""
    polys = [douglas_peucker(p, dp_epsilon) for p in trace_contours(labels)]
    return select_vp_aligned_edges(polys, vps, theta)
