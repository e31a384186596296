"""Diffusion-side arithmetic as pure array operations.

Everything here works on plain numpy arrays against an abstract noise
predictor callable

    predictor(z_t, t, text_on: bool, cond_on: bool) -> eps_hat

so the module is fully testable with mocks and needs no ML stack. The
forward process is

    z_t = sqrt(abar_t) z_0 + sqrt(1 - abar_t) eps

and its inversion recovers x0_hat from a noise estimate. Classifier-free
guidance is applied on two axes: the image-condition axis is composed
first (scale omega2), then the text axis (scale omega1), for four
predictor evaluations per step.

Stepping is deterministic DDIM-style (no stochastic term): it is exactly
testable and consistent with blending a fixed noised trajectory of the
original latent outside the inpainting mask.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    MaskNotBinary,
    PredictorShapeMismatch,
    ShapeMismatch,
    TimestepOutOfRange,
)


class DiffusionSchedule:
    """Cumulative noise-variance products abar_t for t = 1..T; abar_0 = 1."""

    def __init__(self, alpha_bar):
        ab = np.asarray(alpha_bar, dtype=float)
        if ab.ndim != 1 or ab.size < 1:
            raise ValueError("alpha_bar must be a non-empty 1-D sequence")
        if np.any(ab <= 0) or np.any(ab > 1):
            raise ValueError("alpha_bar entries must lie in (0, 1]")
        full = np.concatenate([[1.0], ab])
        if np.any(np.diff(full) >= 0):
            raise ValueError("alpha_bar must be strictly decreasing in t")
        self._abar = full

    @property
    def timesteps(self) -> int:
        return self._abar.size - 1

    def alpha_bar(self, t: int) -> float:
        if not 0 <= t <= self.timesteps:
            raise TimestepOutOfRange(f"t={t} outside [0, {self.timesteps}]")
        return float(self._abar[t])

    @classmethod
    def linear_beta(cls, timesteps: int, beta_start: float = 1e-4, beta_end: float = 0.02):
        betas = np.linspace(beta_start, beta_end, timesteps)
        return cls(np.cumprod(1.0 - betas))

    def to_json_dict(self) -> dict:
        return {"T": self.timesteps, "alpha_bar": self._abar[1:].tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, d: dict) -> "DiffusionSchedule":
        sched = cls(d["alpha_bar"])
        if "T" in d and int(d["T"]) != sched.timesteps:
            raise ValueError("schedule T does not match alpha_bar length")
        return sched


@dataclass(frozen=True)
class GuidanceWeights:
    """omega1 scales the text axis, omega2 the image-condition axis."""

    omega1: float = 1.0
    omega2: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.omega1) and np.isfinite(self.omega2)):
            raise ValueError("guidance weights must be finite")


def _check_same_shape(a: np.ndarray, b: np.ndarray, what: str):
    if a.shape != b.shape:
        raise ShapeMismatch(f"{what}: {a.shape} vs {b.shape}")


def add_noise(z0: np.ndarray, eps: np.ndarray, sched: DiffusionSchedule, t: int) -> np.ndarray:
    """Forward noising: sqrt(abar_t) z0 + sqrt(1 - abar_t) eps."""
    z0 = np.asarray(z0, dtype=float)
    eps = np.asarray(eps, dtype=float)
    _check_same_shape(z0, eps, "add_noise")
    ab = sched.alpha_bar(t)
    return np.sqrt(ab) * z0 + np.sqrt(1.0 - ab) * eps


def predict_x0(z_t: np.ndarray, eps_hat: np.ndarray, sched: DiffusionSchedule, t: int) -> np.ndarray:
    """Invert the forward process: (z_t - sqrt(1-abar) eps_hat) / sqrt(abar)."""
    z_t = np.asarray(z_t, dtype=float)
    eps_hat = np.asarray(eps_hat, dtype=float)
    _check_same_shape(z_t, eps_hat, "predict_x0")
    ab = sched.alpha_bar(t)
    return (z_t - np.sqrt(1.0 - ab) * eps_hat) / np.sqrt(ab)


def cfg_text(eps_uncond: np.ndarray, eps_cond: np.ndarray, omega1: float) -> np.ndarray:
    """Classifier-free guidance: (1 - w) eps_uncond + w eps_cond."""
    eps_uncond = np.asarray(eps_uncond, dtype=float)
    eps_cond = np.asarray(eps_cond, dtype=float)
    _check_same_shape(eps_uncond, eps_cond, "cfg_text")
    return (1.0 - omega1) * eps_uncond + omega1 * eps_cond


def _call_predictor(predictor, z_t, t, text_on, cond_on):
    out = np.asarray(predictor(z_t, t, text_on, cond_on), dtype=float)
    if out.shape != np.asarray(z_t).shape:
        raise PredictorShapeMismatch(
            f"predictor returned {out.shape}, expected {np.asarray(z_t).shape}"
        )
    return out


def cfg_dual(
    predictor,
    z_t: np.ndarray,
    t: int,
    weights: GuidanceWeights,
    skip_zero_weight: bool = False,
) -> np.ndarray:
    """Guidance over both condition axes, from the four predictor corners.

    eps_cond   = (1 - w2) eps(text, none) + w2 eps(text, cond)
    eps_uncond = (1 - w2) eps(none, none) + w2 eps(none, cond)
    result     = cfg_text(eps_uncond, eps_cond, w1)

    Makes exactly 4 predictor calls. With skip_zero_weight and w2 == 1
    the two zero-coefficient corners are skipped (2 calls), which is an
    exact algebraic reduction.
    """
    w1, w2 = weights.omega1, weights.omega2
    if skip_zero_weight and w2 == 1.0:
        eps_tc = _call_predictor(predictor, z_t, t, True, True)
        eps_nc = _call_predictor(predictor, z_t, t, False, True)
        return cfg_text(eps_nc, eps_tc, w1)
    eps_nn = _call_predictor(predictor, z_t, t, False, False)
    eps_nc = _call_predictor(predictor, z_t, t, False, True)
    eps_tn = _call_predictor(predictor, z_t, t, True, False)
    eps_tc = _call_predictor(predictor, z_t, t, True, True)
    eps_cond = (1.0 - w2) * eps_tn + w2 * eps_tc
    eps_uncond = (1.0 - w2) * eps_nn + w2 * eps_nc
    return cfg_text(eps_uncond, eps_cond, w1)


def two_step_x0(
    predictor,
    z_t: np.ndarray,
    t: int,
    sched: DiffusionSchedule,
    weights: GuidanceWeights,
) -> np.ndarray:
    """Two-round clean-image estimate.

    Predict x0 at t, re-noise it deterministically to t_mid = t // 2
    reusing the first noise estimate in place of fresh noise, then
    predict x0 again at t_mid.
    """
    if t < 2:
        raise TimestepOutOfRange("two_step_x0 requires t >= 2")
    eps1 = cfg_dual(predictor, z_t, t, weights)
    x0_first = predict_x0(z_t, eps1, sched, t)
    t_mid = t // 2
    z_mid = add_noise(x0_first, eps1, sched, t_mid)
    eps2 = cfg_dual(predictor, z_mid, t_mid, weights)
    return predict_x0(z_mid, eps2, sched, t_mid)


def inpaint_step(
    predictor,
    z_t: np.ndarray,
    t: int,
    sched: DiffusionSchedule,
    weights: GuidanceWeights,
    mask_latent: np.ndarray,
    z0_orig: np.ndarray,
    fresh_eps: np.ndarray,
    t_next: int | None = None,
) -> np.ndarray:
    """One masked denoising step from t down to t_next (default t - 1).

    Inside the mask: deterministic DDIM-style step using the guided
    noise estimate. Outside: the original latent re-noised to t_next
    with the supplied noise, so the untouched region follows the plain
    forward trajectory.
    """
    if t < 1:
        raise TimestepOutOfRange("inpaint_step requires t >= 1")
    if t_next is None:
        t_next = t - 1
    if not 0 <= t_next < t:
        raise TimestepOutOfRange(f"t_next={t_next} must lie in [0, {t})")
    mask = np.asarray(mask_latent, dtype=float)
    if not np.all((mask == 0.0) | (mask == 1.0)):
        raise MaskNotBinary("mask_latent entries must be exactly 0 or 1")
    z_t = np.asarray(z_t, dtype=float)
    eps_hat = cfg_dual(predictor, z_t, t, weights)
    x0_hat = predict_x0(z_t, eps_hat, sched, t)
    ab_next = sched.alpha_bar(t_next)
    z_pred = np.sqrt(ab_next) * x0_hat + np.sqrt(1.0 - ab_next) * eps_hat
    z_ideal = add_noise(z0_orig, fresh_eps, sched, t_next)
    try:
        return mask * z_pred + (1.0 - mask) * z_ideal
    except ValueError as e:
        raise ShapeMismatch(str(e)) from None


def controlnet_mse(eps: np.ndarray, eps_hat: np.ndarray) -> float:
    """Mean squared difference between true and predicted noise."""
    eps = np.asarray(eps, dtype=float)
    eps_hat = np.asarray(eps_hat, dtype=float)
    _check_same_shape(eps, eps_hat, "controlnet_mse")
    return float(np.mean((eps - eps_hat) ** 2))


def run_inpainting(
    predictor,
    z0_orig: np.ndarray,
    mask_latent: np.ndarray,
    sched: DiffusionSchedule,
    weights: GuidanceWeights,
    steps,
    rng_seed: int,
) -> np.ndarray:
    """Full masked correction loop.

    Noise the original latent to the first timestep with seeded Gaussian
    noise, run inpaint_step down the schedule, and finish by blending
    the final clean estimate into the mask while keeping z0_orig
    bitwise outside it. One noise draw serves both the initialization
    and every ideal-branch re-noising, so the unmasked region follows a
    single forward trajectory of the original latent.
    """
    steps = [int(t) for t in steps]
    if len(steps) == 0 or steps[-1] != 1:
        raise ValueError("steps must end at t = 1")
    if any(s1 <= s2 for s1, s2 in zip(steps, steps[1:])):
        raise ValueError("steps must be strictly decreasing")
    z0_orig = np.asarray(z0_orig, dtype=float)
    mask = np.asarray(mask_latent, dtype=float)
    if not np.all((mask == 0.0) | (mask == 1.0)):
        raise MaskNotBinary("mask_latent entries must be exactly 0 or 1")
    rng = np.random.default_rng(rng_seed)
    eps_true = rng.standard_normal(z0_orig.shape)
    z = add_noise(z0_orig, eps_true, sched, steps[0])
    for i, t in enumerate(steps[:-1]):
        z = inpaint_step(
            predictor, z, t, sched, weights, mask, z0_orig, eps_true, t_next=steps[i + 1]
        )
    eps_hat = cfg_dual(predictor, z, 1, weights)
    x0_hat = predict_x0(z, eps_hat, sched, 1)
    return mask * x0_hat + (1.0 - mask) * z0_orig


class ZeroPredictor:
    """Mock: always predicts zero noise."""

    def __call__(self, z_t, t, text_on, cond_on):
        return np.zeros_like(np.asarray(z_t, dtype=float))


class ConstPredictor:
    """Mock: every entry of the prediction equals a constant."""

    def __init__(self, value: float):
        self.value = float(value)

    def __call__(self, z_t, t, text_on, cond_on):
        return np.full_like(np.asarray(z_t, dtype=float), self.value)


class FixedEpsPredictor:
    """Mock: always returns one fixed noise tensor (the 'true' eps)."""

    def __init__(self, eps: np.ndarray):
        self.eps = np.asarray(eps, dtype=float)

    def __call__(self, z_t, t, text_on, cond_on):
        return self.eps


class CountingPredictor:
    """Wrap a predictor and count calls; used to assert call contracts."""

    def __init__(self, inner):
        self.inner = inner
        self.calls = 0

    def __call__(self, z_t, t, text_on, cond_on):
        self.calls += 1
        return self.inner(z_t, t, text_on, cond_on)
