"""Projective 2D geometry for vanishing-point work.

Vanishing points are kept in homogeneous coordinates (x, y, w) so that
families of image-parallel lines (w = 0) are representable alongside
finite pixel positions. All angle comparisons are undirected: edge and
VP directions carry no canonical orientation, so dot products pass
through abs() before arccos, and every result lands in [0, pi/2].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDirection, IdenticalLines

_NORM_EPS = 1e-9


@dataclass(frozen=True)
class Point2:
    """A pixel-space point. Coordinates must be finite."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"Point2 coordinates must be finite, got ({self.x}, {self.y})")


@dataclass(frozen=True)
class UnitVector2:
    dx: float
    dy: float

    def __post_init__(self):
        n = math.hypot(self.dx, self.dy)
        if abs(n - 1.0) > _NORM_EPS:
            raise ValueError(f"UnitVector2 must have unit norm, got {n}")

    @classmethod
    def from_components(cls, dx: float, dy: float) -> "UnitVector2":
        n = math.hypot(dx, dy)
        if n < _NORM_EPS:
            raise DegenerateDirection(f"cannot normalize near-zero vector ({dx}, {dy})")
        return cls(dx / n, dy / n)

    def negated(self) -> "UnitVector2":
        return UnitVector2(-self.dx, -self.dy)


@dataclass(frozen=True)
class HomogeneousPoint:
    """Projective point (x, y, w); w = 0 encodes a point at infinity."""

    x: float
    y: float
    w: float

    def __post_init__(self):
        for c in (self.x, self.y, self.w):
            if not math.isfinite(c):
                raise ValueError("HomogeneousPoint components must be finite")
        if math.sqrt(self.x**2 + self.y**2 + self.w**2) < _NORM_EPS:
            raise ValueError("HomogeneousPoint components must not all be zero")

    @classmethod
    def from_xy(cls, x: float, y: float) -> "HomogeneousPoint":
        return cls(x, y, 1.0)

    def normalized(self) -> "HomogeneousPoint":
        """Scale to unit norm with the first nonzero component positive."""
        n = math.sqrt(self.x * self.x + self.y * self.y + self.w * self.w)
        x, y, w = self.x / n, self.y / n, self.w / n
        for c in (x, y, w):
            if c != 0.0:
                if c < 0.0:
                    x, y, w = -x, -y, -w
                break
        return HomogeneousPoint(x, y, w)

    def is_at_infinity(self, tol: float = 0.0) -> bool:
        n = self.normalized()
        return abs(n.w) <= tol

    def to_pixel(self) -> Point2:
        if self.w == 0.0:
            raise DegenerateDirection("point at infinity has no pixel position")
        return Point2(self.x / self.w, self.y / self.w)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.w], dtype=float)


@dataclass(frozen=True)
class LineSegment:
    p0: Point2
    p1: Point2

    def __post_init__(self):
        if self.length() < _NORM_EPS:
            raise ValueError("LineSegment endpoints must be at least 1e-9 px apart")

    @classmethod
    def from_xy(cls, x0: float, y0: float, x1: float, y1: float) -> "LineSegment":
        return cls(Point2(x0, y0), Point2(x1, y1))

    def length(self) -> float:
        return math.hypot(self.p1.x - self.p0.x, self.p1.y - self.p0.y)

    def midpoint(self) -> Point2:
        return Point2(0.5 * (self.p0.x + self.p1.x), 0.5 * (self.p0.y + self.p1.y))

    def direction(self) -> UnitVector2:
        return UnitVector2.from_components(self.p1.x - self.p0.x, self.p1.y - self.p0.y)

    def homogeneous_line(self) -> np.ndarray:
        """Coefficients (a, b, c) of the infinite line, ax + by + c = 0, with unit (a, b)."""
        a = self.p0.y - self.p1.y
        b = self.p1.x - self.p0.x
        c = self.p0.x * self.p1.y - self.p1.x * self.p0.y
        n = math.hypot(a, b)
        return np.array([a / n, b / n, c / n], dtype=float)


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics. fx, fy in pixels; (cx, cy) the principal point."""

    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")

    @classmethod
    def default_for(cls, width: int, height: int) -> "CameraIntrinsics":
        # f = max(W, H) puts roughly a 53 degree FOV on the long side
        f = float(max(width, height))
        return cls(f, f, width / 2.0, height / 2.0)


def vp_direction_at(vp: HomogeneousPoint, pixel: Point2) -> UnitVector2:
    """Unit vector from a pixel toward a vanishing point.

    For a finite VP this is (x/w - u, y/w - v) normalized; written
    homogeneously as (x - u*w, y - v*w) it extends to w = 0, where the
    direction is (x, y) regardless of the pixel.

    Raises DegenerateDirection when the pixel coincides with a finite VP.
    """
    n = vp.normalized()
    rx = n.x - pixel.x * n.w
    ry = n.y - pixel.y * n.w
    return UnitVector2.from_components(rx, ry)


def undirected_angle(a: UnitVector2, b: UnitVector2) -> float:
    """Angle between two undirected unit vectors, in [0, pi/2].

    arccos(|a . b|) computed as atan2(|a x b|, |a . b|), which is exact
    at 0 and pi/2 and well conditioned near alignment.
    """
    dot = abs(a.dx * b.dx + a.dy * b.dy)
    cross = abs(a.dx * b.dy - a.dy * b.dx)
    return math.atan2(cross, dot)


def segment_vp_deviation(seg: LineSegment, vp: HomogeneousPoint) -> float:
    """Angle between a segment and the VP direction at its midpoint."""
    return undirected_angle(seg.direction(), vp_direction_at(vp, seg.midpoint()))


def intersect_lines(a: LineSegment, b: LineSegment) -> HomogeneousPoint:
    """Homogeneous intersection of the two infinite lines through a and b.

    Parallel lines intersect at infinity (w = 0). Raises IdenticalLines
    when the lines coincide within 1e-9.
    """
    la = a.homogeneous_line()
    lb = b.homogeneous_line()
    p = np.cross(la, lb)
    if float(np.linalg.norm(p)) < _NORM_EPS:
        raise IdenticalLines("segments lie on the same infinite line")
    return HomogeneousPoint(float(p[0]), float(p[1]), float(p[2])).normalized()


def backproject_direction(k: CameraIntrinsics, vp: HomogeneousPoint) -> np.ndarray:
    """Camera-space unit direction whose projection converges at the VP.

    Finite VP (u, v): normalize((u - cx)/fx, (v - cy)/fy, 1). At-infinity
    VP with direction (x, y): normalize(x/fx, y/fy, 0). Canonical sign is
    z >= 0, ties broken by y >= 0 then x >= 0.
    """
    n = vp.normalized()
    if n.w == 0.0:
        d = np.array([n.x / k.fx, n.y / k.fy, 0.0])
    else:
        u, v = n.x / n.w, n.y / n.w
        d = np.array([(u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0])
    d = d / np.linalg.norm(d)
    if d[2] < 0 or (d[2] == 0 and (d[1] < 0 or (d[1] == 0 and d[0] < 0))):
        d = -d
    return d


def camera_angle_error(k: CameraIntrinsics, a: HomogeneousPoint, b: HomogeneousPoint) -> float:
    """Undirected angle between the back-projected directions of two VPs."""
    da = backproject_direction(k, a)
    db = backproject_direction(k, b)
    dot = abs(float(np.dot(da, db)))
    cross = float(np.linalg.norm(np.cross(da, db)))
    return math.atan2(cross, dot)
