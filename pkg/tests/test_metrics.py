import math

import numpy as np
import pytest

from vpkit.detect import RansacConfig, detect_vps_in_image
from vpkit.errors import EmptyInput, NoDetections, ShapeMismatch
from vpkit.geometry import CameraIntrinsics, HomogeneousPoint
from vpkit.metrics import (
    angle_accuracy,
    best_of_k_select,
    build_aa_report,
    image_angle_error,
    mse,
    psnr,
)
from vpkit.synthetic import line_bundle, render_segments


K = CameraIntrinsics(512, 512, 0, 0)


class TestImageAngleError:
    def test_target_in_detections_zero(self):
        t = HomogeneousPoint(40, 50, 1)
        assert image_angle_error([HomogeneousPoint(500, 0, 1), t], t, K) == 0.0

    def test_min_of_candidates(self):
        # detections at the principal point and 45 degrees off: min is 0
        det = [HomogeneousPoint(0, 0, 1), HomogeneousPoint(512, 0, 1)]
        err = image_angle_error(det, HomogeneousPoint(0, 0, 1), K)
        assert err == 0.0
        err45 = image_angle_error([HomogeneousPoint(512, 0, 1)], HomogeneousPoint(0, 0, 1), K)
        assert math.isclose(err45, 45.0, abs_tol=1e-9)

    def test_empty_raises(self):
        with pytest.raises(NoDetections):
            image_angle_error([], HomogeneousPoint(0, 0, 1), K)


class TestAngleAccuracy:
    def test_all_zero(self):
        assert angle_accuracy([0, 0, 0], [3.0])[3.0] == 1.0

    def test_counting(self):
        aa = angle_accuracy([2, 4, 12], [3.0, 5.0, 10.0])
        assert aa[3.0] == pytest.approx(1 / 3)
        assert aa[5.0] == pytest.approx(2 / 3)
        assert aa[10.0] == pytest.approx(2 / 3)

    def test_sentinel_never_counts(self):
        assert angle_accuracy([90.0], [3.0, 5.0, 10.0])[10.0] == 0.0

    def test_monotone_in_threshold(self):
        rng = np.random.default_rng(0)
        errors = rng.uniform(0, 90, 100)
        aa = angle_accuracy(errors, [1, 2, 5, 15, 45, 89])
        vals = [aa[t] for t in (1, 2, 5, 15, 45, 89)]
        assert all(a <= b for a, b in zip(vals, vals[1:]))

    def test_empty_raises(self):
        with pytest.raises(EmptyInput):
            angle_accuracy([], [3.0])

    def test_strictly_below(self):
        assert angle_accuracy([3.0], [3.0])[3.0] == 0.0


class TestBestOfK:
    def detector_for(self, mapping):
        def det(img):
            return mapping[int(img)]

        return det

    def test_tie_break_lowest_index(self):
        t = HomogeneousPoint(0, 0, 1)
        det = self.detector_for({0: [t], 1: [t], 2: [t]})
        idx, err = best_of_k_select([0, 1, 2], t, det, K)
        assert idx == 0 and err == 0.0

    def test_picks_closest_bundle(self):
        target = HomogeneousPoint(0, 0, 1)
        near = HomogeneousPoint(10, 0, 1)   # ~1.1 degrees at f=512
        far = HomogeneousPoint(55, 0, 1)    # ~6 degrees
        det = self.detector_for({0: [far], 1: [near]})
        idx, err = best_of_k_select([0, 1], target, det, K)
        assert idx == 1
        assert err < 1.5

    def test_no_detection_scores_ninety(self):
        target = HomogeneousPoint(0, 0, 1)
        det = self.detector_for({0: [], 1: [HomogeneousPoint(30, 0, 1)]})
        idx, err = best_of_k_select([0, 1], target, det, K)
        assert idx == 1

    def test_single_candidate(self):
        t = HomogeneousPoint(5, 5, 1)
        det = self.detector_for({0: [t]})
        assert best_of_k_select([0], t, det, K) == (0, 0.0)

    def test_permutation_covariance(self):
        target = HomogeneousPoint(0, 0, 1)
        vps = {0: [HomogeneousPoint(80, 0, 1)], 1: [HomogeneousPoint(8, 0, 1)], 2: []}
        det = self.detector_for(vps)
        idx1, _ = best_of_k_select([0, 1, 2], target, det, K)
        idx2, _ = best_of_k_select([2, 1, 0], target, det, K)
        assert idx1 == 1 and idx2 == 1


class TestReport:
    def test_report_shape_and_sentinel(self):
        rep = build_aa_report(
            [("a", 1.0), ("b", None), ("c", 7.0)],
            thresholds=(3.0, 5.0, 10.0),
            intrinsics=K,
        )
        d = rep.to_json_dict()
        assert d["per_image"][1]["min_angle_error_deg"] == 90.0
        assert d["aa_at"]["3"] == pytest.approx(1 / 3)
        assert d["aa_at"]["10"] == pytest.approx(2 / 3)
        assert d["intrinsics"]["fx"] == 512
        assert d["psd"] is None  # perceptual-distance slot is always null here
        csv = rep.to_csv()
        assert csv.splitlines()[0] == "image_id,min_angle_error_deg,detector"
        assert len(csv.splitlines()) == 4


class TestPixelMetrics:
    def test_identical_psnr_inf(self):
        a = np.random.default_rng(0).random((8, 8))
        assert psnr(a, a) == math.inf

    def test_zero_vs_one(self):
        assert psnr(np.zeros((4, 4)), np.ones((4, 4))) == 0.0

    def test_mse_hundredth(self):
        a = np.zeros((10, 10))
        b = np.full((10, 10), 0.1)
        assert math.isclose(mse(a, b), 0.01, rel_tol=1e-12)
        assert math.isclose(psnr(a, b), 20.0, rel_tol=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            mse(np.zeros((2, 2)), np.zeros((3, 3)))


class TestEndToEndBundle:
    def test_rendered_bundle_angle_error(self):
        rng = np.random.default_rng(5)
        target = HomogeneousPoint(300, 120, 1)
        segs = line_bundle(target, 10, rng, width=512, height=512, length_range=(90, 150))
        img = render_segments(512, 512, segs)
        k = CameraIntrinsics.default_for(512, 512)
        cands = detect_vps_in_image(img, RansacConfig(rng_seed=1, min_segment_length=15))
        err = image_angle_error([c.vp for c in cands], target, k)
        assert err < 1.0
