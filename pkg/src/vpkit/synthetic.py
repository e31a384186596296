"""Deterministic synthetic scenes for tests, demos, and evaluation.

The renderer is analytic: pixel intensity falls off linearly with
distance from the segment, giving anti-aliased lines with well-behaved
Sobel responses and no dependence on any external drawing library.
"""

from __future__ import annotations

import math

import numpy as np

from .geometry import CameraIntrinsics, HomogeneousPoint, LineSegment, Point2


def render_aa_segment(
    width: int,
    height: int,
    p0,
    p1,
    thickness: float = 1.0,
    image: np.ndarray | None = None,
    value: float = 1.0,
    falloff: float = 1.0,
) -> np.ndarray:
    """Draw one anti-aliased segment onto a float image in [0, 1].

    Intensity is value inside the half-thickness core and ramps to zero
    over `falloff` pixels (wider ramps give cleaner Sobel directions).
    Accumulates with max() so crossings stay clean.
    """
    img = np.zeros((height, width)) if image is None else image
    x0, y0 = float(p0[0]), float(p0[1])
    x1, y1 = float(p1[0]), float(p1[1])
    half = thickness / 2.0
    pad = half + falloff + 1.0
    # only touch a bounding box around the segment
    r0 = max(int(math.floor(min(y0, y1) - pad)), 0)
    r1 = min(int(math.ceil(max(y0, y1) + pad)), height - 1)
    c0 = max(int(math.floor(min(x0, x1) - pad)), 0)
    c1 = min(int(math.ceil(max(x0, x1) + pad)), width - 1)
    if r0 > r1 or c0 > c1:
        return img
    ys, xs = np.mgrid[r0 : r1 + 1, c0 : c1 + 1]
    dx, dy = x1 - x0, y1 - y0
    len2 = dx * dx + dy * dy
    if len2 == 0:
        return img
    t = ((xs - x0) * dx + (ys - y0) * dy) / len2
    t = np.clip(t, 0.0, 1.0)
    px = x0 + t * dx
    py = y0 + t * dy
    dist = np.hypot(xs - px, ys - py)
    intensity = np.clip((half + falloff - dist) / falloff, 0.0, 1.0) * value
    region = img[r0 : r1 + 1, c0 : c1 + 1]
    np.maximum(region, intensity, out=region)
    return img


def misaligned_line_fixture(offset_deg: float, size: int = 128):
    """The weighting-mode separation fixture: one line, one VP at infinity.

    The line sits at 30 degrees plus the given offset; the VP direction
    is exactly 30 degrees, so offset_deg is the line's angular error.
    The base angle and the wide intensity ramp keep the rasterized
    Sobel magnitude and direction stable across small rotations, so
    score differences reflect the weighting, not rendering artifacts.

    Returns (image, vp).
    """
    base = math.radians(30.0)
    ang = base + math.radians(offset_deg)
    c = size / 2.0
    r = size * 50.0 / 128.0
    p0 = (c - r * math.cos(ang), c - r * math.sin(ang))
    p1 = (c + r * math.cos(ang), c + r * math.sin(ang))
    img = render_aa_segment(size, size, p0, p1, thickness=2.0, falloff=2.0)
    vp = HomogeneousPoint(math.cos(base), math.sin(base), 0.0)
    return img, vp


def segment_toward_vp(vp: HomogeneousPoint, anchor, length: float) -> LineSegment:
    """Segment centered at anchor, pointing along the VP direction there."""
    from .geometry import vp_direction_at

    a = Point2(float(anchor[0]), float(anchor[1]))
    d = vp_direction_at(vp, a)
    hx, hy = d.dx * length / 2.0, d.dy * length / 2.0
    return LineSegment(Point2(a.x - hx, a.y - hy), Point2(a.x + hx, a.y + hy))


def line_bundle(
    vp: HomogeneousPoint,
    n: int,
    rng: np.random.Generator,
    width: int = 256,
    height: int = 256,
    length_range=(60.0, 120.0),
    jitter: float = 0.0,
) -> list:
    """Segments all pointing at one VP, anchors spread over the image."""
    segs = []
    attempts = 0
    while len(segs) < n and attempts < 50 * n:
        attempts += 1
        anchor = (rng.uniform(0.15, 0.85) * width, rng.uniform(0.15, 0.85) * height)
        length = rng.uniform(*length_range)
        try:
            seg = segment_toward_vp(vp, anchor, length)
        except Exception:
            continue
        if jitter > 0:
            seg = LineSegment(
                Point2(seg.p0.x + rng.normal(0, jitter), seg.p0.y + rng.normal(0, jitter)),
                Point2(seg.p1.x + rng.normal(0, jitter), seg.p1.y + rng.normal(0, jitter)),
            )
        segs.append(seg)
    return segs


def render_segments(width: int, height: int, segments, thickness: float = 1.2) -> np.ndarray:
    img = np.zeros((height, width))
    for s in segments:
        render_aa_segment(width, height, (s.p0.x, s.p0.y), (s.p1.x, s.p1.y), thickness, image=img)
    return img


def smooth_field(rng: np.random.Generator, height: int, width: int, cell: int = 4) -> np.ndarray:
    """Low-frequency random field in [0, 1]: coarse noise, bilinear upsample."""
    coarse = rng.random((height // cell + 2, width // cell + 2))
    ys = np.linspace(0, coarse.shape[0] - 1.001, height)
    xs = np.linspace(0, coarse.shape[1] - 1.001, width)
    y0 = ys.astype(int)
    x0 = xs.astype(int)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    a = coarse[np.ix_(y0, x0)]
    b = coarse[np.ix_(y0, x0 + 1)]
    c = coarse[np.ix_(y0 + 1, x0)]
    d = coarse[np.ix_(y0 + 1, x0 + 1)]
    return a * (1 - fy) * (1 - fx) + b * (1 - fy) * fx + c * fy * (1 - fx) + d * fy * fx


def gradient_check_case(seed: int, size: int = 16, n_vps: int = 2):
    """One (pred, gt, vps, cfg) case for finite-difference gradient checking.

    Built so an h = 1e-4 central-difference probe is trustworthy: hard
    (binary) line bundles on a flat background mean every pixel has
    Sobel magnitude either exactly 0 or >= contrast. There are no
    low-magnitude pixels whose angle sensitivity (~1/M) would blow up
    the probe step, and with magnitude_epsilon = 1e-3 a probe can raise
    a flat pixel's magnitude by at most ~2.8e-4, so no pixel ever
    crosses the gate during the check. The config uses a 10 degree
    threshold: the weighting has a |theta| kink at exact alignment with
    slope k * sigmoid'(k * theta_thresh), and the wider threshold pushes
    that slope into the sigmoid tail so probes that straddle a perfectly
    aligned pixel stay accurate.
    """
    from .edges import VpLossConfig

    rng = np.random.default_rng((0x67C4AD, seed))

    vps = []
    while len(vps) < n_vps:
        x = rng.uniform(-2.0 * size, 3.0 * size)
        y = rng.uniform(-2.0 * size, 3.0 * size)
        w = 1.0 if rng.random() < 0.8 else 0.0
        try:
            vps.append(HomogeneousPoint(x, y, w))
        except ValueError:
            continue

    def one_image():
        acc = np.zeros((size, size))
        for vp in vps:
            for _ in range(2):
                anchor = (rng.uniform(0.2, 0.8) * size, rng.uniform(0.2, 0.8) * size)
                try:
                    seg = segment_toward_vp(vp, anchor, rng.uniform(0.5, 0.9) * size)
                except Exception:
                    continue
                # small angular jitter spreads pixels over the transition band
                ang = math.atan2(seg.p1.y - seg.p0.y, seg.p1.x - seg.p0.x)
                ang += math.radians(rng.uniform(-2.0, 2.0))
                half = seg.length() / 2.0
                mx, my = anchor
                p0 = (mx - half * math.cos(ang), my - half * math.sin(ang))
                p1 = (mx + half * math.cos(ang), my + half * math.sin(ang))
                render_aa_segment(size, size, p0, p1, thickness=1.6, image=acc)
        # two off-angle distractor lines
        for _ in range(2):
            p0 = rng.uniform(0.1, 0.9, 2) * size
            ang = rng.uniform(0, math.pi)
            p1 = p0 + rng.uniform(0.4, 0.7) * size * np.array([math.cos(ang), math.sin(ang)])
            render_aa_segment(size, size, p0, p1, thickness=1.6, image=acc)
        return np.where(acc >= 0.6, 0.4, 0.0)

    cfg = VpLossConfig(theta_thresh=math.radians(10.0), magnitude_epsilon=1e-3)
    return one_image(), one_image(), vps, cfg


def _rotation(yaw: float, pitch: float) -> np.ndarray:
    cy, sy = math.cos(yaw), math.sin(yaw)
    cp, sp = math.cos(pitch), math.sin(pitch)
    ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
    rx = np.array([[1, 0, 0], [0, cp, -sp], [0, sp, cp]])
    return rx @ ry


def _project(k: CameraIntrinsics, pts3: np.ndarray) -> np.ndarray:
    uv = np.empty((len(pts3), 2))
    uv[:, 0] = k.fx * pts3[:, 0] / pts3[:, 2] + k.cx
    uv[:, 1] = k.fy * pts3[:, 1] / pts3[:, 2] + k.cy
    return uv


BOX_EDGES = [
    (0, 1), (2, 3), (4, 5), (6, 7),   # x-direction edges
    (0, 2), (1, 3), (4, 6), (5, 7),   # y-direction edges
    (0, 4), (1, 5), (2, 6), (3, 7),   # z-direction edges
]


class BoxScene:
    """A rendered wireframe-box image with its exact vanishing points."""

    def __init__(self, image, vps, intrinsics, segments):
        self.image = image
        self.vps = vps  # dict: axis name -> HomogeneousPoint (true VP)
        self.intrinsics = intrinsics
        self.segments = segments


def wireframe_box_scene(
    seed: int,
    width: int = 512,
    height: int = 512,
    n_boxes: int = 2,
    thickness: float = 2.0,
) -> BoxScene:
    """Render axis-aligned boxes under a random yaw/pitch camera.

    The boxes share one 3D orientation, so each of the three edge
    directions has one exact vanishing point computed analytically from
    the camera geometry. Boxes are spaced apart so their wireframes stay
    mostly unentangled on screen and edge runs survive extraction.
    """
    rng = np.random.default_rng(seed)
    k = CameraIntrinsics.default_for(width, height)
    yaw = rng.uniform(math.radians(20), math.radians(40)) * rng.choice([-1.0, 1.0])
    pitch = rng.uniform(math.radians(5), math.radians(10))
    rot = _rotation(yaw, pitch)

    corners = np.array(
        [[x, y, z] for z in (0, 1) for y in (0, 1) for x in (0, 1)], dtype=float
    )
    segments = []
    img = np.zeros((height, width))
    for b in range(n_boxes):
        size = np.array(
            [rng.uniform(2.0, 2.6), rng.uniform(1.6, 2.2), rng.uniform(3.6, 4.6)]
        )
        offset = np.array(
            [
                (b - (n_boxes - 1) / 2.0) * rng.uniform(6.0, 7.0) - size[0] / 2,
                rng.uniform(-1.8, -1.0),
                rng.uniform(6.5, 7.5) + 1.5 * b,
            ]
        )
        pts = (corners * size + offset) @ rot.T
        pts[:, 2] = np.maximum(pts[:, 2], 1.0)  # keep in front of the camera
        uv = _project(k, pts)
        for i, j in BOX_EDGES:
            seg = LineSegment(Point2(*uv[i]), Point2(*uv[j]))
            segments.append(seg)
            render_aa_segment(width, height, uv[i], uv[j], thickness, image=img, falloff=1.5)

    vps = {}
    for name, axis in (("x", [1.0, 0, 0]), ("y", [0, 1.0, 0]), ("z", [0, 0, 1.0])):
        d = rot @ np.asarray(axis)
        if abs(d[2]) < 1e-9:
            vps[name] = HomogeneousPoint(d[0] * k.fx, d[1] * k.fy, 0.0).normalized()
        else:
            vps[name] = HomogeneousPoint(
                k.fx * d[0] / d[2] + k.cx, k.fy * d[1] / d[2] + k.cy, 1.0
            )
    return BoxScene(image=img, vps=vps, intrinsics=k, segments=segments)
