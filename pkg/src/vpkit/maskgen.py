"""Inpainting masks from original/desired outline pairs.

The editable region for one correction is the quadrilateral spanned by
an original (misaligned) segment and its desired replacement, with the
endpoint correspondence chosen by minimum total distance so reversed
click order still produces the intended strip. Pair regions are
rasterized with an inclusive even-odd scanline fill, unioned, and
dilated to give the inpainter blend margin.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from PIL import Image
from scipy import ndimage

from .errors import DegenerateRegion
from .geometry import LineSegment, Point2


@dataclass(frozen=True)
class OutlinePair:
    original: LineSegment
    desired: LineSegment

    def __post_init__(self):
        o0, o1 = self.original.p0, self.original.p1
        d0, d1 = self.desired.p0, self.desired.p1

        def close(a, b):
            return math.hypot(a.x - b.x, a.y - b.y) < 1e-6

        same_fwd = close(o0, d0) and close(o1, d1)
        same_rev = close(o0, d1) and close(o1, d0)
        if same_fwd or same_rev:
            raise DegenerateRegion("original and desired outlines are identical")


@dataclass(frozen=True)
class Mask:
    width: int
    height: int
    bits: np.ndarray  # bool, shape (height, width)

    @property
    def coverage(self) -> float:
        return float(self.bits.mean())

    @property
    def set_pixels(self) -> int:
        return int(self.bits.sum())

    def to_png_bytes(self) -> bytes:
        buf = io.BytesIO()
        Image.fromarray(self.bits.astype(np.uint8) * 255, mode="L").save(buf, format="PNG")
        return buf.getvalue()

    def save(self, path) -> None:
        with open(path, "wb") as f:
            f.write(self.to_png_bytes())

    @classmethod
    def from_png(cls, path_or_bytes) -> "Mask":
        if isinstance(path_or_bytes, (bytes, bytearray)):
            img = Image.open(io.BytesIO(path_or_bytes))
        else:
            img = Image.open(path_or_bytes)
        arr = np.asarray(img.convert("L"))
        return cls(width=arr.shape[1], height=arr.shape[0], bits=arr >= 128)


def _orient(a: Point2, b: Point2, c: Point2) -> float:
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)


def _proper_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool:
    d1 = _orient(c, d, a)
    d2 = _orient(c, d, b)
    d3 = _orient(a, b, c)
    d4 = _orient(a, b, d)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


def _polygon_area(pts) -> float:
    area = 0.0
    n = len(pts)
    for i in range(n):
        a, b = pts[i], pts[(i + 1) % n]
        area += a.x * b.y - b.x * a.y
    return 0.5 * area


def pair_endpoints(pair: OutlinePair) -> tuple:
    """Order the four endpoints into a simple quadrilateral.

    Correspondence (o0-d0, o1-d1) vs (o0-d1, o1-d0) is picked by minimum
    total endpoint distance; a self-intersecting result gets its last
    two vertices swapped. Raises DegenerateRegion below 1 px^2 of area.
    """
    o0, o1 = pair.original.p0, pair.original.p1
    d0, d1 = pair.desired.p0, pair.desired.p1
    straight = math.hypot(o0.x - d0.x, o0.y - d0.y) + math.hypot(o1.x - d1.x, o1.y - d1.y)
    crossed = math.hypot(o0.x - d1.x, o0.y - d1.y) + math.hypot(o1.x - d0.x, o1.y - d0.y)
    if straight <= crossed:
        m0, m1 = d0, d1  # m0 matches o0, m1 matches o1
    else:
        m0, m1 = d1, d0

    def simple(q):
        return not (
            _proper_intersect(q[0], q[1], q[2], q[3])
            or _proper_intersect(q[1], q[2], q[3], q[0])
        )

    # of the three cyclic orderings of four points, one is always simple;
    # when the outlines cross each other only the interleaved order works
    for quad in ([o0, o1, m1, m0], [o0, o1, m0, m1], [o0, m0, o1, m1]):
        if simple(quad):
            break
    if abs(_polygon_area(quad)) < 1.0:
        raise DegenerateRegion("outline pair encloses less than 1 px^2")
    return tuple(quad)


def rasterize_polygon(quad, width: int, height: int) -> Mask:
    """Even-odd scanline fill over pixel centers; on-edge centers count.

    Pixel (row, col) has its center at (x=col, y=row).
    """
    pts = list(quad)
    n = len(pts)
    ys = np.arange(height, dtype=float)[:, None]
    xs = np.arange(width, dtype=float)[None, :]
    crossings = np.zeros((height, width), dtype=int)
    on_edge = np.zeros((height, width), dtype=bool)
    for i in range(n):
        a, b = pts[i], pts[(i + 1) % n]
        y1, y2 = a.y, b.y
        if y1 != y2:
            spans = (y1 > ys) != (y2 > ys)  # scanline strictly between endpoints
            with np.errstate(divide="ignore", invalid="ignore"):
                x_int = a.x + (ys - y1) * (b.x - a.x) / (y2 - y1)
            crossings += (spans & (xs < x_int)).astype(int)
        # inclusive boundary: distance from pixel center to the segment
        dx, dy = b.x - a.x, b.y - a.y
        len2 = dx * dx + dy * dy
        if len2 == 0:
            continue
        t = np.clip(((xs - a.x) * dx + (ys - a.y) * dy) / len2, 0.0, 1.0)
        dist = np.hypot(xs - (a.x + t * dx), ys - (a.y + t * dy))
        on_edge |= dist < 1e-9
    inside = (crossings % 2 == 1) | on_edge
    return Mask(width=width, height=height, bits=inside)


def _disc_structure(radius: int) -> np.ndarray:
    if radius <= 2:
        return np.ones((2 * radius + 1, 2 * radius + 1), dtype=bool)
    rr = np.arange(-radius, radius + 1)
    yy, xx = np.meshgrid(rr, rr, indexing="ij")
    return yy * yy + xx * xx <= radius * radius + 1e-9


def dilate(mask: Mask, radius: int) -> Mask:
    """Morphological dilation; square element up to radius 2, disc beyond."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if radius == 0:
        return mask
    grown = ndimage.binary_dilation(mask.bits, structure=_disc_structure(radius))
    return Mask(width=mask.width, height=mask.height, bits=grown)


def _stroke_segment(bits: np.ndarray, seg: LineSegment) -> None:
    """Set the pixels a segment passes through (nearest-pixel traversal)."""
    h, w = bits.shape
    length = seg.length()
    steps = max(int(math.ceil(length * 2)), 1)
    for i in range(steps + 1):
        t = i / steps
        x = seg.p0.x + t * (seg.p1.x - seg.p0.x)
        y = seg.p0.y + t * (seg.p1.y - seg.p0.y)
        c, r = int(round(x)), int(round(y))
        if 0 <= r < h and 0 <= c < w:
            bits[r, c] = True


def build_mask(pairs, width: int, height: int, dilation: int = 5) -> Mask:
    """Union of all between-outline regions, then dilation.

    The outlines themselves are stroked into the mask: the original
    outline must be erasable and the desired one drawable, and skinny
    between-regions may otherwise miss every pixel center. Raises
    DegenerateRegion only when every pair degenerates.
    """
    pairs = list(pairs)
    if not pairs:
        raise DegenerateRegion("no outline pairs supplied")
    acc = np.zeros((height, width), dtype=bool)
    ok = 0
    first_err = None
    for pair in pairs:
        try:
            quad = pair_endpoints(pair)
        except DegenerateRegion as e:
            first_err = first_err or e
            continue
        acc |= rasterize_polygon(quad, width, height).bits
        _stroke_segment(acc, pair.original)
        _stroke_segment(acc, pair.desired)
        ok += 1
    if ok == 0:
        raise first_err or DegenerateRegion("all outline pairs degenerate")
    return dilate(Mask(width=width, height=height, bits=acc), dilation)
