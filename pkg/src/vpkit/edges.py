"""Sobel edge fields and the vanishing-point alignment loss.

The score of one image against one VP sums, over every pixel with enough
gradient, the edge magnitude times a weight measuring how closely the
local edge direction points at the VP:

    S = sum_p M(p) * w(p)

with two weighting modes:

  sigmoid_threshold   w = sigma(k * (theta_thresh - theta)), where theta
                      is the undirected angle between the edge direction
                      and the VP direction. Edges inside the threshold
                      get weight close to 1, edges outside decay fast.
  dot_product         w = |d . v|, the uniform weighting used by earlier
                      perspective scoring, kept for ablations.

The loss between a predicted and a reference image is the mean squared
difference of their per-VP scores. The analytic gradient of that loss
with respect to the predicted pixels backpropagates through the sigmoid,
the angle, the direction normalization, the magnitude, and finally the
Sobel filter via its transposed scatter, matching replicate padding.

Pixels whose magnitude is below ``magnitude_epsilon`` carry no score and
no gradient: the edge direction is undefined there and the gate removes
the division singularity.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import convolve2d, correlate2d

from .errors import ChannelMismatch, EmptyVpSet, FlatRegion, ImageTooSmall, ShapeMismatch
from .geometry import HomogeneousPoint, UnitVector2

SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
SOBEL_Y = SOBEL_X.T

SIGMOID_THRESHOLD = "sigmoid_threshold"
DOT_PRODUCT = "dot_product"

# about 5 degrees
DEFAULT_THETA_THRESH = math.radians(5.0)


@dataclass(frozen=True)
class VpLossConfig:
    theta_thresh: float = DEFAULT_THETA_THRESH
    sigmoid_steepness: float = 50.0          # 1/radian; raw radians would be nearly linear
    magnitude_epsilon: float = 1e-4
    weighting_mode: str = SIGMOID_THRESHOLD
    border_policy: str = "replicate"

    def __post_init__(self):
        if not 0.0 < self.theta_thresh < math.pi / 2:
            raise ValueError("theta_thresh must be in (0, pi/2)")
        if self.sigmoid_steepness <= 0:
            raise ValueError("sigmoid_steepness must be positive")
        if self.magnitude_epsilon <= 0:
            raise ValueError("magnitude_epsilon must be positive")
        if self.weighting_mode not in (SIGMOID_THRESHOLD, DOT_PRODUCT):
            raise ValueError(f"unknown weighting_mode {self.weighting_mode!r}")
        if self.border_policy != "replicate":
            raise ValueError("only replicate border_policy is supported")

    def to_json_dict(self) -> dict:
        return {
            "theta_thresh_deg": math.degrees(self.theta_thresh),
            "sigmoid_steepness": self.sigmoid_steepness,
            "magnitude_epsilon": self.magnitude_epsilon,
            "weighting_mode": self.weighting_mode,
            "border_policy": self.border_policy,
        }


@dataclass(frozen=True)
class EdgeField:
    """Per-pixel Sobel gradients and their magnitude (all H x W, float64)."""

    gx: np.ndarray
    gy: np.ndarray
    magnitude: np.ndarray

    @property
    def shape(self) -> tuple:
        return self.gx.shape


@dataclass
class VpScoreReport:
    vps: list
    scores_pred: list
    scores_gt: list
    loss: float
    config: VpLossConfig = field(default_factory=VpLossConfig)

    def to_json_dict(self) -> dict:
        return {
            "vps": [[vp.x, vp.y, vp.w] for vp in self.vps],
            "scores_pred": list(self.scores_pred),
            "scores_gt": list(self.scores_gt),
            "loss": self.loss,
            "config": self.config.to_json_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


def to_grayscale(rgb: np.ndarray) -> np.ndarray:
    """Rec.601 luma of an (H, W, 3) image with values in [0, 1]."""
    rgb = np.asarray(rgb, dtype=float)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ChannelMismatch(f"expected (H, W, 3), got {rgb.shape}")
    return 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]


def sobel(img: np.ndarray) -> EdgeField:
    """Sobel gradients with replicate padding at the borders."""
    img = np.asarray(img, dtype=float)
    if img.ndim != 2:
        raise ImageTooSmall(f"expected a 2-D image, got shape {img.shape}")
    h, w = img.shape
    if h < 3 or w < 3:
        raise ImageTooSmall(f"image must be at least 3x3, got {h}x{w}")
    padded = np.pad(img, 1, mode="edge")
    gx = correlate2d(padded, SOBEL_X, mode="valid")
    gy = correlate2d(padded, SOBEL_Y, mode="valid")
    return EdgeField(gx=gx, gy=gy, magnitude=np.hypot(gx, gy))


def _sobel_adjoint(upstream: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Transpose of pad-replicate-then-correlate: scatter, then fold the pad."""
    g = convolve2d(upstream, kernel, mode="full")  # (H+2, W+2)
    core = g[1:-1, 1:-1].copy()
    core[0, :] += g[0, 1:-1]
    core[-1, :] += g[-1, 1:-1]
    core[:, 0] += g[1:-1, 0]
    core[:, -1] += g[1:-1, -1]
    core[0, 0] += g[0, 0]
    core[0, -1] += g[0, -1]
    core[-1, 0] += g[-1, 0]
    core[-1, -1] += g[-1, -1]
    return core


def edge_direction_at(ef: EdgeField, x: int, y: int, magnitude_epsilon: float = 1e-4) -> UnitVector2:
    """Unit edge direction (perpendicular to the gradient) at integer pixel (x, y)."""
    m = ef.magnitude[y, x]
    if m < magnitude_epsilon:
        raise FlatRegion(f"magnitude {m} below epsilon at ({x}, {y})")
    return UnitVector2(-ef.gy[y, x] / m, ef.gx[y, x] / m)


def _vp_direction_grid(vp: HomogeneousPoint, h: int, w: int):
    """Unit VP-direction components per pixel plus a validity mask."""
    n = vp.normalized()
    us = np.arange(w, dtype=float)[None, :]
    vs = np.arange(h, dtype=float)[:, None]
    rx = n.x - us * n.w
    ry = n.y - vs * n.w
    rx, ry = np.broadcast_arrays(rx, ry)
    norm = np.hypot(rx, ry)
    valid = norm >= 1e-9
    safe = np.where(valid, norm, 1.0)
    return rx / safe, ry / safe, valid


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def vp_alignment_score(ef: EdgeField, vp: HomogeneousPoint, cfg: VpLossConfig | None = None) -> float:
    """Magnitude-weighted alignment of an edge field with one VP.

    The angle between the edge direction d = (-gy, gx)/M and the VP
    direction v is computed as atan2(|g . v|, |g x v|): for 2-D vectors
    (d . v)^2 + (d x v)^2 = 1, so this equals arccos(|d . v|) but stays
    well conditioned when the directions nearly align.
    """
    cfg = cfg or VpLossConfig()
    h, w = ef.shape
    vx, vy, valid = _vp_direction_grid(vp, h, w)
    m = ef.magnitude
    active = (m >= cfg.magnitude_epsilon) & valid
    if not active.any():
        return 0.0
    # u = M * (d . v), q = M * |d x v|
    u = np.abs(ef.gx * vy - ef.gy * vx)
    q = np.abs(ef.gx * vx + ef.gy * vy)
    if cfg.weighting_mode == DOT_PRODUCT:
        weight = np.zeros_like(m)
        weight[active] = np.minimum(u[active] / m[active], 1.0)
    else:
        theta = np.arctan2(q, u)
        weight = _sigmoid(cfg.sigmoid_steepness * (cfg.theta_thresh - theta))
    return float(np.sum(m[active] * weight[active]))


def vp_loss(
    pred: np.ndarray,
    gt: np.ndarray,
    vps: list,
    cfg: VpLossConfig | None = None,
) -> VpScoreReport:
    """Mean squared difference of per-VP alignment scores (pred vs gt)."""
    cfg = cfg or VpLossConfig()
    pred = np.asarray(pred, dtype=float)
    gt = np.asarray(gt, dtype=float)
    if pred.shape != gt.shape:
        raise ShapeMismatch(f"pred {pred.shape} vs gt {gt.shape}")
    if len(vps) == 0:
        raise EmptyVpSet("at least one vanishing point is required")
    ef_pred = sobel(pred)
    ef_gt = sobel(gt)
    scores_pred = [vp_alignment_score(ef_pred, vp, cfg) for vp in vps]
    scores_gt = [vp_alignment_score(ef_gt, vp, cfg) for vp in vps]
    diffs = np.asarray(scores_gt) - np.asarray(scores_pred)
    loss = float(np.mean(diffs**2))
    return VpScoreReport(vps=list(vps), scores_pred=scores_pred, scores_gt=scores_gt, loss=loss, config=cfg)


def _score_gradient_wrt_sobel(ef: EdgeField, vp: HomogeneousPoint, cfg: VpLossConfig):
    """d(score)/d(gx), d(score)/d(gy) for one VP, on active pixels only."""
    h, w = ef.shape
    vx, vy, valid = _vp_direction_grid(vp, h, w)
    m = ef.magnitude
    active = (m >= cfg.magnitude_epsilon) & valid
    dgx = np.zeros((h, w))
    dgy = np.zeros((h, w))
    if not active.any():
        return dgx, dgy
    gx, gy = ef.gx[active], ef.gy[active]
    vxa, vya = vx[active], vy[active]
    ma = m[active]
    u = gx * vya - gy * vxa  # M * (d . v) before abs
    su = np.sign(u)
    if cfg.weighting_mode == DOT_PRODUCT:
        # score contribution is M * |u|/M = |u|
        dgx[active] = su * vya
        dgy[active] = -su * vxa
        return dgx, dgy
    q = gx * vxa + gy * vya  # M * (d x v) up to sign
    sq = np.sign(q)
    au, aq = np.abs(u), np.abs(q)
    theta = np.arctan2(aq, au)
    wgt = _sigmoid(cfg.sigmoid_steepness * (cfg.theta_thresh - theta))
    # theta = atan2(|q|, |u|), |u|^2 + |q|^2 = M^2:
    #   dtheta/dg = (|u| d|q| - |q| d|u|) / M^2
    m2 = ma * ma
    dtheta_dgx = (au * sq * vxa - aq * su * vya) / m2
    dtheta_dgy = (au * sq * vya + aq * su * vxa) / m2
    dw_dtheta = -cfg.sigmoid_steepness * wgt * (1.0 - wgt)
    dgx[active] = wgt * (gx / ma) + ma * dw_dtheta * dtheta_dgx
    dgy[active] = wgt * (gy / ma) + ma * dw_dtheta * dtheta_dgy
    return dgx, dgy


def vp_loss_gradient(
    pred: np.ndarray,
    gt: np.ndarray,
    vps: list,
    cfg: VpLossConfig | None = None,
) -> np.ndarray:
    """Analytic d(loss)/d(pred pixel), same shape as pred."""
    cfg = cfg or VpLossConfig()
    pred = np.asarray(pred, dtype=float)
    gt = np.asarray(gt, dtype=float)
    if pred.shape != gt.shape:
        raise ShapeMismatch(f"pred {pred.shape} vs gt {gt.shape}")
    if len(vps) == 0:
        raise EmptyVpSet("at least one vanishing point is required")
    ef_pred = sobel(pred)
    ef_gt = sobel(gt)
    n = len(vps)
    acc_gx = np.zeros(pred.shape)
    acc_gy = np.zeros(pred.shape)
    for vp in vps:
        s_pred = vp_alignment_score(ef_pred, vp, cfg)
        s_gt = vp_alignment_score(ef_gt, vp, cfg)
        resid = (2.0 / n) * (s_pred - s_gt)
        if resid == 0.0:
            continue
        dgx, dgy = _score_gradient_wrt_sobel(ef_pred, vp, cfg)
        acc_gx += resid * dgx
        acc_gy += resid * dgy
    return _sobel_adjoint(acc_gx, SOBEL_X) + _sobel_adjoint(acc_gy, SOBEL_Y)


def finite_difference_gradient(
    pred: np.ndarray,
    gt: np.ndarray,
    vps: list,
    cfg: VpLossConfig | None = None,
    pixels=None,
    h: float = 1e-4,
) -> np.ndarray:
    """Central-difference d(loss)/d(pred pixel) at the given (row, col) pixels.

    Independent check for vp_loss_gradient: evaluates the loss twice per
    probed pixel and never touches the analytic path. Returns a dense
    field (zeros at unprobed pixels).
    """
    cfg = cfg or VpLossConfig()
    pred = np.asarray(pred, dtype=float)
    out = np.zeros(pred.shape)
    if pixels is None:
        pixels = [(r, c) for r in range(pred.shape[0]) for c in range(pred.shape[1])]
    for r, c in pixels:
        bumped = pred.copy()
        bumped[r, c] += h
        lp = vp_loss(bumped, gt, vps, cfg).loss
        bumped[r, c] = pred[r, c] - h
        lm = vp_loss(bumped, gt, vps, cfg).loss
        out[r, c] = (lp - lm) / (2.0 * h)
    return out


def gradient_check(
    pred: np.ndarray,
    gt: np.ndarray,
    vps: list,
    cfg: VpLossConfig | None = None,
    top_k: int = 50,
    h: float = 1e-4,
) -> dict:
    """Compare the analytic gradient with central differences.

    Probes the top_k pixels by analytic |gradient| and reports the max
    relative error there.
    """
    cfg = cfg or VpLossConfig()
    analytic = vp_loss_gradient(pred, gt, vps, cfg)
    flat = np.abs(analytic).ravel()
    k = min(top_k, flat.size)
    idx = np.argsort(flat)[::-1][:k]
    pixels = [divmod(int(i), pred.shape[1]) for i in idx]
    fd = finite_difference_gradient(pred, gt, vps, cfg, pixels=pixels, h=h)
    rel_errs = []
    for r, c in pixels:
        a, f = analytic[r, c], fd[r, c]
        denom = max(abs(a), abs(f), 1e-12)
        rel_errs.append(abs(a - f) / denom)
    max_rel = float(max(rel_errs)) if rel_errs else 0.0
    return {
        "max_rel_err": max_rel,
        "probed_pixels": len(pixels),
        "mean_rel_err": float(np.mean(rel_errs)) if rel_errs else 0.0,
    }


def total_loss(l_cn: float, l_vp: float, lam: float) -> float:
    """Combined objective: reconstruction term plus lam times the VP term."""
    if l_cn < 0 or l_vp < 0 or lam < 0:
        raise ValueError("loss terms and lambda must be non-negative")
    return l_cn + lam * l_vp
