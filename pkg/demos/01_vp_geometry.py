"""Vanishing-point geometry basics.

Walks through the projective primitives: directions toward a VP from
different pixels, points at infinity for parallel line families, line
intersection in homogeneous coordinates, and the camera-space angle
between two VPs.
"""

import math

from vpkit import (
    CameraIntrinsics,
    HomogeneousPoint,
    LineSegment,
    Point2,
    backproject_direction,
    camera_angle_error,
    intersect_lines,
    segment_vp_deviation,
    vp_direction_at,
)

# A finite VP behaves like a pixel position: the direction toward it
# depends on where you stand.
vp = HomogeneousPoint(300, 120, 1)
for pixel in (Point2(0, 0), Point2(256, 256), Point2(300, 500)):
    d = vp_direction_at(vp, pixel)
    print(f"from ({pixel.x:5.0f},{pixel.y:5.0f}) toward VP: ({d.dx:+.3f}, {d.dy:+.3f})")

# A VP at infinity (w = 0) is a pure direction; every pixel agrees.
horizon = HomogeneousPoint(1, 0, 0)
d = vp_direction_at(horizon, Point2(123, -456))
print(f"\nat-infinity VP direction everywhere: ({d.dx:+.0f}, {d.dy:+.0f})")

# Two image lines meet at a homogeneous point; parallels meet at w = 0.
a = LineSegment(Point2(0, 0), Point2(100, 50))
b = LineSegment(Point2(0, 80), Point2(100, 90))
p = intersect_lines(a, b)
print(f"\nconverging lines meet at ({p.to_pixel().x:.1f}, {p.to_pixel().y:.1f})")
c = LineSegment(Point2(0, 10), Point2(100, 60))  # parallel to a
p_inf = intersect_lines(a, c)
print(f"parallel lines meet at infinity: w = {p_inf.normalized().w:.1e}")

# How far a segment's direction deviates from pointing at a VP:
seg = LineSegment(Point2(50, 50), Point2(150, 95))
print(f"\nsegment deviation from VP: {math.degrees(segment_vp_deviation(seg, vp)):.2f} deg")

# Camera-space angle between VPs, the basis of the AA metric.
k = CameraIntrinsics.default_for(512, 512)
other = HomogeneousPoint(350, 130, 1)
print(f"\nback-projected direction of VP: {backproject_direction(k, vp).round(3)}")
print(f"camera angle between nearby VPs: {math.degrees(camera_angle_error(k, vp, other)):.2f} deg")
