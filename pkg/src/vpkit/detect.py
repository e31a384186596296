"""Line-segment extraction and RANSAC vanishing-point detection.

A classical, fully deterministic detector: threshold strong edge pixels,
grow them into direction-consistent runs, fit segments by total least
squares, then cluster segment intersections with seeded 2-sample RANSAC.
Greedy sequential model extraction (best candidate, remove inliers,
repeat) keeps inlier sets disjoint. Scores are length-weighted so long
structural edges dominate texture noise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .edges import EdgeField, sobel, to_grayscale
from .geometry import HomogeneousPoint, LineSegment, Point2

# pixels join a run when their edge direction agrees with the seed's within this angle
DIRECTION_TOL = math.radians(10.0)


@dataclass(frozen=True)
class DetectedSegment:
    seg: LineSegment
    support: int
    mean_magnitude: float


@dataclass(frozen=True)
class RansacConfig:
    iterations: int = 2000
    consensus_angle: float = math.radians(2.0)
    max_vps: int = 3
    min_inliers: int = 4
    min_segment_length: float = 20.0
    magnitude_quantile: float = 0.9
    rng_seed: int = 0

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0 < self.consensus_angle < math.pi / 4:
            raise ValueError("consensus_angle must be in (0, pi/4)")

    def to_json_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "consensus_angle_deg": math.degrees(self.consensus_angle),
            "max_vps": self.max_vps,
            "min_inliers": self.min_inliers,
            "min_segment_length": self.min_segment_length,
            "magnitude_quantile": self.magnitude_quantile,
            "rng_seed": self.rng_seed,
        }


@dataclass(frozen=True)
class VpCandidate:
    vp: HomogeneousPoint
    inliers: tuple
    score: float


def extract_segments(ef: EdgeField, cfg: RansacConfig | None = None) -> list:
    """Group strong edge pixels into straight runs and fit segments.

    Pixels above the magnitude quantile are grown into 8-connected runs
    whose edge directions agree with the run seed within 10 degrees;
    each run is fit by total least squares and kept when both its pixel
    support and its fitted length reach min_segment_length.
    """
    cfg = cfg or RansacConfig()
    m = ef.magnitude
    h, w = m.shape
    thresh = float(np.quantile(m, cfg.magnitude_quantile))
    strong = m > thresh
    if not strong.any():
        return []
    # unit edge directions for strong pixels
    with np.errstate(invalid="ignore", divide="ignore"):
        dx = np.where(strong, -ef.gy / np.where(m == 0, 1.0, m), 0.0)
        dy = np.where(strong, ef.gx / np.where(m == 0, 1.0, m), 0.0)

    visited = np.zeros((h, w), dtype=bool)
    neighbors = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
    out = []
    for r0 in range(h):
        for c0 in range(w):
            if not strong[r0, c0] or visited[r0, c0]:
                continue
            seed_d = (dx[r0, c0], dy[r0, c0])
            run = []
            stack = [(r0, c0)]
            visited[r0, c0] = True
            while stack:
                r, c = stack.pop()
                run.append((r, c))
                for dr, dc in neighbors:
                    rr, cc = r + dr, c + dc
                    if not (0 <= rr < h and 0 <= cc < w):
                        continue
                    if visited[rr, cc] or not strong[rr, cc]:
                        continue
                    cos = abs(seed_d[0] * dx[rr, cc] + seed_d[1] * dy[rr, cc])
                    if cos < math.cos(DIRECTION_TOL):
                        continue
                    visited[rr, cc] = True
                    stack.append((rr, cc))
            if len(run) < cfg.min_segment_length:
                continue
            seg = _fit_segment_tls(run)
            if seg is None or seg.length() < cfg.min_segment_length:
                continue
            mags = [m[r, c] for r, c in run]
            out.append(
                DetectedSegment(seg=seg, support=len(run), mean_magnitude=float(np.mean(mags)))
            )
    return out


def _fit_segment_tls(run) -> LineSegment | None:
    """Total-least-squares segment through a pixel run (x = col, y = row)."""
    pts = np.array([(c, r) for r, c in run], dtype=float)
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    cov = centered.T @ centered
    evals, evecs = np.linalg.eigh(cov)
    direction = evecs[:, np.argmax(evals)]
    t = centered @ direction
    tmin, tmax = float(t.min()), float(t.max())
    if tmax - tmin < 1e-9:
        return None
    p0 = centroid + tmin * direction
    p1 = centroid + tmax * direction
    return LineSegment(Point2(p0[0], p0[1]), Point2(p1[0], p1[1]))


def _deviations_arr(vp_xyw: np.ndarray, mids: np.ndarray, dirs: np.ndarray) -> np.ndarray:
    """Vectorized segment_vp_deviation for all segments; NaN where degenerate.

    vp_xyw must already be normalized to unit 3-vector scale.
    """
    x, y, w = float(vp_xyw[0]), float(vp_xyw[1]), float(vp_xyw[2])
    rx = x - mids[:, 0] * w
    ry = y - mids[:, 1] * w
    norm = np.hypot(rx, ry)
    ok = norm >= 1e-9
    dev = np.full(len(mids), np.nan)
    if ok.any():
        vx = rx[ok] / norm[ok]
        vy = ry[ok] / norm[ok]
        dot = np.abs(dirs[ok, 0] * vx + dirs[ok, 1] * vy)
        cross = np.abs(dirs[ok, 0] * vy - dirs[ok, 1] * vx)
        dev[ok] = np.arctan2(cross, dot)
    return dev


def _refine_vp(lines: np.ndarray, lengths: np.ndarray) -> HomogeneousPoint:
    """Length-weighted homogeneous least squares over inlier lines.

    Minimizes sum_j len_j * (l_j . p)^2 with unit-normal line
    coefficients; the minimizer is the smallest eigenvector of the
    weighted scatter matrix. Handles at-infinity solutions naturally.
    """
    a = np.zeros((3, 3))
    for l, wgt in zip(lines, lengths):
        a += wgt * np.outer(l, l)
    _, vecs = np.linalg.eigh(a)
    v = vecs[:, 0]
    return HomogeneousPoint(float(v[0]), float(v[1]), float(v[2])).normalized()


def detect_vps(segments: list, cfg: RansacConfig | None = None) -> list:
    """Cluster segments into up to max_vps vanishing-point candidates.

    Seeded 2-segment-sample RANSAC per model; the best hypothesis by
    length-weighted consensus is refined by weighted least squares, its
    inliers are removed, and the search repeats. Candidates are sorted
    by score, and every reported inlier satisfies the consensus
    predicate against the reported (refined) VP.
    """
    cfg = cfg or RansacConfig()
    if len(segments) < 2:
        return []
    mids = np.array([(s.seg.midpoint().x, s.seg.midpoint().y) for s in segments])
    dirs = np.array([(s.seg.direction().dx, s.seg.direction().dy) for s in segments])
    lengths = np.array([s.seg.length() for s in segments])
    lines = np.array([s.seg.homogeneous_line() for s in segments])

    remaining = list(range(len(segments)))
    candidates = []
    for model_idx in range(cfg.max_vps):
        if len(remaining) < 2:
            break
        rem = np.array(remaining)
        # one seeded generator per model; pair draws are vectorized up front
        rng = np.random.default_rng((cfg.rng_seed, model_idx))
        pairs = rng.integers(0, len(rem), size=(cfg.iterations, 2))
        best = None  # (score, inlier_index_array, vp_array)
        for i, j in pairs:
            if i == j:
                continue
            p = np.cross(lines[rem[i]], lines[rem[j]])
            nrm = float(np.linalg.norm(p))
            if nrm < 1e-9:
                continue  # coincident lines
            dev = _deviations_arr(p / nrm, mids[rem], dirs[rem])
            sel = dev <= cfg.consensus_angle
            if np.count_nonzero(sel) < 2:
                continue
            inl = rem[sel]
            score = float(lengths[inl].sum())
            if best is None or score > best[0]:
                best = (score, inl, p / nrm)
        if best is None or len(best[1]) < cfg.min_inliers:
            break
        _, inl, vp_arr = best
        refined = _refine_vp(lines[inl], lengths[inl])
        dev_ref = _deviations_arr(refined.as_array(), mids[rem], dirs[rem])
        inl_ref = rem[dev_ref <= cfg.consensus_angle]
        if len(inl_ref) >= cfg.min_inliers:
            vp, inl = refined, inl_ref
        else:
            # keep the raw hypothesis, whose inliers satisfy the predicate
            vp = HomogeneousPoint(float(vp_arr[0]), float(vp_arr[1]), float(vp_arr[2]))
        candidates.append(
            VpCandidate(
                vp=vp.normalized(),
                inliers=tuple(sorted(int(k) for k in inl)),
                score=float(lengths[inl].sum()),
            )
        )
        chosen = set(int(k) for k in inl)
        remaining = [k for k in remaining if k not in chosen]
    candidates.sort(key=lambda c: -c.score)
    return candidates


def detect_vps_in_image(img_gray: np.ndarray, cfg: RansacConfig | None = None) -> list:
    """Convenience pipeline: Sobel, segment extraction, RANSAC clustering."""
    cfg = cfg or RansacConfig()
    if img_gray.ndim == 3:
        img_gray = to_grayscale(img_gray)
    ef = sobel(img_gray)
    return detect_vps(extract_segments(ef, cfg), cfg)


def candidates_to_json_dict(candidates: list) -> dict:
    return {
        "candidates": [
            {
                "vp": [c.vp.x, c.vp.y, c.vp.w],
                "score": c.score,
                "inliers": list(c.inliers),
            }
            for c in candidates
        ]
    }
