import math

import numpy as np
import pytest

from oracles import naive_sobel, naive_vp_score
from vpkit.edges import (
    DOT_PRODUCT,
    VpLossConfig,
    edge_direction_at,
    sobel,
    to_grayscale,
    total_loss,
    vp_alignment_score,
    vp_loss,
)
from vpkit.errors import ChannelMismatch, EmptyVpSet, FlatRegion, ImageTooSmall
from vpkit.geometry import HomogeneousPoint


def smooth_random_image(rng, h, w):
    """Random low-frequency image in [0, 1]: coarse noise upsampled bilinearly."""
    coarse = rng.random((h // 4 + 2, w // 4 + 2))
    ys = np.linspace(0, coarse.shape[0] - 1.001, h)
    xs = np.linspace(0, coarse.shape[1] - 1.001, w)
    y0 = ys.astype(int)
    x0 = xs.astype(int)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    a = coarse[np.ix_(y0, x0)]
    b = coarse[np.ix_(y0, x0 + 1)]
    c = coarse[np.ix_(y0 + 1, x0)]
    d = coarse[np.ix_(y0 + 1, x0 + 1)]
    return a * (1 - fy) * (1 - fx) + b * (1 - fy) * fx + c * fy * (1 - fx) + d * fy * fx


class TestGrayscale:
    def test_white(self):
        img = np.ones((4, 4, 3))
        assert np.allclose(to_grayscale(img), 1.0)

    def test_pure_red(self):
        img = np.zeros((2, 2, 3))
        img[:, :, 0] = 1.0
        assert np.allclose(to_grayscale(img), 0.299)

    def test_gray_fixed_point(self):
        img = np.full((3, 3, 3), 0.5)
        assert np.allclose(to_grayscale(img), 0.5)

    def test_channel_mismatch(self):
        with pytest.raises(ChannelMismatch):
            to_grayscale(np.zeros((4, 4, 4)))


class TestSobel:
    def test_constant_image_zero(self):
        ef = sobel(np.full((8, 8), 0.7))
        assert np.allclose(ef.gx, 0) and np.allclose(ef.gy, 0) and np.allclose(ef.magnitude, 0)

    def test_vertical_step_hand_convolved(self):
        # columns 0,0,1,1: at the column left of the step, gx = 4 by hand convolution
        img = np.zeros((5, 4))
        img[:, 2:] = 1.0
        ef = sobel(img)
        assert ef.gx[2, 1] == 4.0
        assert ef.gy[2, 1] == 0.0

    def test_transpose_swaps_roles(self):
        rng = np.random.default_rng(0)
        img = rng.random((7, 9))
        a = sobel(img.T)
        b = sobel(img)
        assert np.allclose(a.gx, b.gy.T)
        assert np.allclose(a.gy, b.gx.T)

    def test_too_small(self):
        with pytest.raises(ImageTooSmall):
            sobel(np.zeros((2, 5)))

    def test_matches_naive_oracle(self):
        rng = np.random.default_rng(1)
        img = rng.random((6, 7))
        gx, gy, mag = naive_sobel(img.tolist())
        ef = sobel(img)
        assert np.allclose(ef.gx, gx, atol=1e-12)
        assert np.allclose(ef.gy, gy, atol=1e-12)
        assert np.allclose(ef.magnitude, mag, atol=1e-12)

    def test_magnitude_consistency(self):
        rng = np.random.default_rng(2)
        ef = sobel(rng.random((16, 16)))
        assert np.allclose(ef.magnitude, np.hypot(ef.gx, ef.gy), atol=1e-9)


class TestEdgeDirection:
    def test_vertical_edge(self):
        img = np.zeros((5, 5))
        img[:, 3:] = 1.0
        ef = sobel(img)
        d = edge_direction_at(ef, 2, 2)
        assert (abs(d.dx), abs(d.dy)) == (0.0, 1.0)

    def test_horizontal_edge(self):
        img = np.zeros((5, 5))
        img[3:, :] = 1.0
        ef = sobel(img)
        d = edge_direction_at(ef, 2, 2)
        assert (abs(d.dx), abs(d.dy)) == (1.0, 0.0)

    def test_flat_region(self):
        ef = sobel(np.zeros((5, 5)))
        with pytest.raises(FlatRegion):
            edge_direction_at(ef, 2, 2)


class TestAlignmentScore:
    def test_constant_image_scores_zero(self):
        ef = sobel(np.full((8, 8), 0.3))
        assert vp_alignment_score(ef, HomogeneousPoint(4, -1000, 1)) == 0.0

    def test_aligned_step_high_weight(self):
        img = np.zeros((8, 8))
        img[:, 4:] = 1.0
        ef = sobel(img)
        cfg = VpLossConfig()
        # VP far above the edge column: VP directions are nearly vertical,
        # matching the vertical edge, so weights sit near sigma(k * theta_thresh)
        s = vp_alignment_score(ef, HomogeneousPoint(3.5, -1000, 1), cfg)
        total_mag = float(ef.magnitude[ef.magnitude >= cfg.magnitude_epsilon].sum())
        expected_w = 1.0 / (1.0 + math.exp(-cfg.sigmoid_steepness * cfg.theta_thresh))
        assert s > 0.95 * expected_w * total_mag
        assert s <= total_mag

    def test_perpendicular_vp_tiny_score(self):
        img = np.zeros((8, 8))
        img[:, 4:] = 1.0
        ef = sobel(img)
        cfg = VpLossConfig()
        s = vp_alignment_score(ef, HomogeneousPoint(1, 0, 0), cfg)
        total_mag = float(ef.magnitude.sum())
        # sigma(-k * (pi/2 - theta_thresh)) with k = 50 is below 1e-6
        assert s < 1e-6 * total_mag

    def test_matches_naive_oracle_random(self):
        rng = np.random.default_rng(42)
        for mode in ("sigmoid_threshold", "dot_product"):
            cfg = VpLossConfig(weighting_mode=mode)
            for _ in range(20):
                img = rng.random((16, 16))
                vp = (rng.uniform(-50, 50), rng.uniform(-50, 50), rng.choice([0.0, 1.0]))
                try:
                    hvp = HomogeneousPoint(*vp)
                except ValueError:
                    continue
                fast = vp_alignment_score(sobel(img), hvp, cfg)
                ref = naive_vp_score(
                    img.tolist(), vp, cfg.theta_thresh, cfg.sigmoid_steepness,
                    cfg.magnitude_epsilon, mode,
                )
                assert math.isclose(fast, ref, rel_tol=1e-9, abs_tol=1e-12)

    def test_dot_mode_perfect_alignment_weight_one(self):
        # vertical edge, VP at vertical infinity: |d . v| = 1 on every edge pixel
        img = np.zeros((8, 8))
        img[:, 4:] = 1.0
        ef = sobel(img)
        cfg = VpLossConfig(weighting_mode=DOT_PRODUCT)
        s = vp_alignment_score(ef, HomogeneousPoint(0, 1, 0), cfg)
        total_mag = float(ef.magnitude[ef.magnitude >= cfg.magnitude_epsilon].sum())
        assert math.isclose(s, total_mag, rel_tol=1e-9)

    def test_rotation_monotonicity(self):
        # rotating a line's direction away from its VP strictly decreases the
        # sigmoid score; the line is a synthetic edge field with constant
        # magnitude so only the direction varies
        from vpkit.edges import EdgeField

        cfg = VpLossConfig()
        vp = HomogeneousPoint(1.0, 0.0, 0.0)  # at infinity along +x
        scores = []
        for deg in range(0, 46):
            ang = math.radians(deg)
            gx = np.zeros((16, 16))
            gy = np.zeros((16, 16))
            m = 2.5
            # edge direction (cos, sin) => gradient perpendicular to it
            gx[8, 2:14] = -m * math.sin(ang)
            gy[8, 2:14] = m * math.cos(ang)
            ef = EdgeField(gx=gx, gy=gy, magnitude=np.hypot(gx, gy))
            scores.append(vp_alignment_score(ef, vp, cfg))
        for a, b in zip(scores, scores[1:]):
            assert b < a


class TestVpLoss:
    def test_identical_images_zero_loss(self):
        rng = np.random.default_rng(9)
        img = rng.random((12, 12))
        rep = vp_loss(img, img, [HomogeneousPoint(3, 3, 1)])
        assert rep.loss == 0.0

    def test_single_vp_delta(self):
        # loss = (S_gt - S_pred)^2 / 1; verified through the report fields
        rng = np.random.default_rng(10)
        pred, gt = rng.random((10, 10)), rng.random((10, 10))
        rep = vp_loss(pred, gt, [HomogeneousPoint(5, 5, 1)])
        expect = (rep.scores_gt[0] - rep.scores_pred[0]) ** 2
        assert math.isclose(rep.loss, expect, rel_tol=1e-12)

    def test_two_vp_mean(self):
        rng = np.random.default_rng(11)
        pred, gt = rng.random((10, 10)), rng.random((10, 10))
        vps = [HomogeneousPoint(2, 3, 1), HomogeneousPoint(1, 0, 0)]
        rep = vp_loss(pred, gt, vps)
        deltas = np.array(rep.scores_gt) - np.array(rep.scores_pred)
        assert math.isclose(rep.loss, float(np.mean(deltas**2)), rel_tol=1e-12)

    def test_symmetry_in_pred_gt(self):
        rng = np.random.default_rng(12)
        pred, gt = rng.random((9, 9)), rng.random((9, 9))
        vps = [HomogeneousPoint(0, -4, 1)]
        assert math.isclose(vp_loss(pred, gt, vps).loss, vp_loss(gt, pred, vps).loss, rel_tol=1e-12)

    def test_empty_vp_set(self):
        with pytest.raises(EmptyVpSet):
            vp_loss(np.zeros((4, 4)), np.zeros((4, 4)), [])

    def test_report_json_shape(self):
        rng = np.random.default_rng(13)
        rep = vp_loss(rng.random((8, 8)), rng.random((8, 8)), [HomogeneousPoint(1, 2, 1)])
        d = rep.to_json_dict()
        assert set(d) == {"vps", "scores_pred", "scores_gt", "loss", "config"}
        assert d["vps"] == [[1.0, 2.0, 1.0]]


class TestTotalLoss:
    def test_lambda_zero_disables(self):
        assert total_loss(1.0, 2.0, 0.0) == 1.0

    def test_weighted(self):
        assert total_loss(1.0, 2.0, 0.5) == 2.0

    def test_all_zero(self):
        assert total_loss(0.0, 0.0, 7.0) == 0.0

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            total_loss(-1.0, 0.0, 1.0)
