"""Angle-accuracy evaluation and pixel-fidelity report plumbing.

AA@tau is the fraction of evaluated images whose best detected VP lies
within tau degrees of the target VP, measured between back-projected
camera-space directions. Images where the detector finds nothing score
90 degrees (the maximum undirected error) so denominators always equal
the image count; every report records that convention along with the
intrinsics used.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyInput, NoDetections, ShapeMismatch
from .geometry import CameraIntrinsics, HomogeneousPoint, camera_angle_error

NO_DETECTION_ERROR_DEG = 90.0

DEFAULT_THRESHOLDS = (3.0, 5.0, 10.0)


@dataclass
class AAReport:
    thresholds: tuple = DEFAULT_THRESHOLDS
    per_image: list = field(default_factory=list)  # (image_id, min_error_deg, detector)
    aa_at: dict = field(default_factory=dict)
    intrinsics: CameraIntrinsics | None = None
    detector: str = "ransac"

    def to_json_dict(self) -> dict:
        k = self.intrinsics
        return {
            "thresholds_deg": list(self.thresholds),
            "per_image": [
                {"image_id": i, "min_angle_error_deg": e, "detector": d}
                for i, e, d in self.per_image
            ],
            "aa_at": {f"{t:g}": v for t, v in self.aa_at.items()},
            "intrinsics": None if k is None else {"fx": k.fx, "fy": k.fy, "cx": k.cx, "cy": k.cy},
            "detector": self.detector,
            "no_detection_error_deg": NO_DETECTION_ERROR_DEG,
            # perceptual-distance slot kept for schema stability; computing
            # it needs a pretrained network, which this toolkit excludes
            "psd": None,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        lines = ["image_id,min_angle_error_deg,detector"]
        for i, e, d in self.per_image:
            lines.append(f"{i},{e},{d}")
        return "\n".join(lines) + "\n"


def image_angle_error(detected, target: HomogeneousPoint, k: CameraIntrinsics) -> float:
    """Smallest angular error (degrees) of any detected VP to the target."""
    if not detected:
        raise NoDetections("no vanishing points detected")
    return min(math.degrees(camera_angle_error(k, d, target)) for d in detected)


def angle_accuracy(errors, thresholds=DEFAULT_THRESHOLDS) -> dict:
    """Fraction of errors strictly below each threshold."""
    errors = list(errors)
    if not errors:
        raise EmptyInput("no errors to aggregate")
    ts = list(thresholds)
    if any(t <= 0 for t in ts) or any(a >= b for a, b in zip(ts, ts[1:])):
        raise ValueError("thresholds must be positive and ascending")
    n = len(errors)
    return {t: sum(1 for e in errors if e < t) / n for t in ts}


def best_of_k_select(candidate_images, target: HomogeneousPoint, detector, k_intr: CameraIntrinsics):
    """Index and error of the candidate image best aligned with the target.

    detector maps a grayscale image to a list of HomogeneousPoint; ties
    break toward the lowest index; images with no detections score the
    90 degree sentinel.
    """
    if not candidate_images:
        raise EmptyInput("no candidate images")
    errors = []
    for img in candidate_images:
        try:
            errors.append(image_angle_error(detector(img), target, k_intr))
        except NoDetections:
            errors.append(NO_DETECTION_ERROR_DEG)
    best = int(np.argmin(errors))
    return best, errors[best]


def build_aa_report(per_image_errors, thresholds=DEFAULT_THRESHOLDS,
                    intrinsics: CameraIntrinsics | None = None,
                    detector: str = "ransac") -> AAReport:
    """Assemble the report from (image_id, error_deg_or_None) pairs.

    None stands for 'no detections' and scores the 90 degree sentinel.
    """
    per_image = []
    errors = []
    for image_id, err in per_image_errors:
        e = NO_DETECTION_ERROR_DEG if err is None else float(err)
        per_image.append((image_id, e, detector))
        errors.append(e)
    aa = angle_accuracy(errors, thresholds)
    return AAReport(
        thresholds=tuple(thresholds),
        per_image=per_image,
        aa_at=aa,
        intrinsics=intrinsics,
        detector=detector,
    )


def mse(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ShapeMismatch(f"{a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB for [0, 1] images; inf when equal."""
    m = mse(a, b)
    if m == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / m)
