import numpy as np

from test_edges import smooth_random_image
from vpkit.edges import (
    VpLossConfig,
    finite_difference_gradient,
    gradient_check,
    vp_loss,
    vp_loss_gradient,
)
from vpkit.geometry import HomogeneousPoint


def random_vps(rng, n):
    out = []
    while len(out) < n:
        x, y = rng.uniform(-40, 60, 2)
        w = 1.0 if rng.random() < 0.8 else 0.0
        try:
            out.append(HomogeneousPoint(x, y, w))
        except ValueError:
            continue
    return out


class TestGradient:
    def test_identical_images_zero_gradient(self):
        rng = np.random.default_rng(0)
        img = rng.random((10, 10))
        g = vp_loss_gradient(img, img, [HomogeneousPoint(5, 5, 1)])
        assert np.all(g == 0.0)

    def test_constant_pred_zero_gradient(self):
        # constant pred: every magnitude is zero, the gate blocks all flow
        rng = np.random.default_rng(1)
        gt = rng.random((9, 9))
        g = vp_loss_gradient(np.full((9, 9), 0.5), gt, [HomogeneousPoint(4, 4, 1)])
        assert np.all(g == 0.0)

    def test_matches_finite_differences_sigmoid(self):
        from vpkit.synthetic import gradient_check_case

        for trial in range(3):
            pred, gt, vps, cfg = gradient_check_case(7000 + trial)
            res = gradient_check(pred, gt, vps, cfg, top_k=50)
            assert res["max_rel_err"] < 1e-3

    def test_matches_finite_differences_dot_mode(self):
        cfg = VpLossConfig(weighting_mode="dot_product")
        rng = np.random.default_rng(2)
        pred = smooth_random_image(rng, 16, 16)
        gt = smooth_random_image(rng, 16, 16)
        vps = random_vps(rng, 2)
        res = gradient_check(pred, gt, vps, cfg, top_k=50)
        assert res["max_rel_err"] < 1e-3

    def test_matches_naive_chain_on_small_image(self):
        # every pixel probed by central differences on a 5x5 image
        rng = np.random.default_rng(3)
        pred = smooth_random_image(rng, 5, 5)
        gt = smooth_random_image(rng, 5, 5)
        vps = [HomogeneousPoint(2, -10, 1)]
        analytic = vp_loss_gradient(pred, gt, vps)
        fd = finite_difference_gradient(pred, gt, vps)
        denom = np.maximum(np.maximum(np.abs(analytic), np.abs(fd)), 1e-6)
        assert np.max(np.abs(analytic - fd) / denom) < 1e-3

    def test_gradient_descends_loss(self):
        rng = np.random.default_rng(4)
        pred = smooth_random_image(rng, 12, 12)
        gt = smooth_random_image(rng, 12, 12)
        vps = random_vps(rng, 2)
        l0 = vp_loss(pred, gt, vps).loss
        g = vp_loss_gradient(pred, gt, vps)
        step = 1e-3 / max(np.abs(g).max(), 1e-12)
        l1 = vp_loss(pred - step * g, gt, vps).loss
        assert l1 < l0

    def test_seeded_reproducibility(self):
        rng1 = np.random.default_rng(5)
        rng2 = np.random.default_rng(5)
        a = smooth_random_image(rng1, 8, 8)
        b = smooth_random_image(rng2, 8, 8)
        vps = [HomogeneousPoint(1, 1, 1)]
        g1 = vp_loss_gradient(a, np.roll(a, 1, axis=0), vps)
        g2 = vp_loss_gradient(b, np.roll(b, 1, axis=0), vps)
        assert np.array_equal(g1, g2)
