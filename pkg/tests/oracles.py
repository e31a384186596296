"""Deliberately naive reference implementations used as test oracles.

Everything here is written as plain double loops over pixels, sharing no
code with the optimized paths it checks.
"""

import math


def naive_sobel(img):
    """Replicate-padded 3x3 Sobel as explicit loops. Returns (gx, gy, mag) lists of lists."""
    h = len(img)
    w = len(img[0])

    def at(r, c):
        r = min(max(r, 0), h - 1)
        c = min(max(c, 0), w - 1)
        return img[r][c]

    kx = [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]]
    ky = [[-1, -2, -1], [0, 0, 0], [1, 2, 1]]
    gx = [[0.0] * w for _ in range(h)]
    gy = [[0.0] * w for _ in range(h)]
    mag = [[0.0] * w for _ in range(h)]
    for r in range(h):
        for c in range(w):
            sx = sy = 0.0
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    sx += kx[dr + 1][dc + 1] * at(r + dr, c + dc)
                    sy += ky[dr + 1][dc + 1] * at(r + dr, c + dc)
            gx[r][c] = sx
            gy[r][c] = sy
            mag[r][c] = math.sqrt(sx * sx + sy * sy)
    return gx, gy, mag


def naive_vp_score(img, vp_xyw, theta_thresh, steepness, mag_eps, mode):
    """Alignment score of one image against one VP, pixel by pixel."""
    gx, gy, mag = naive_sobel(img)
    vx3, vy3, vw3 = vp_xyw
    n3 = math.sqrt(vx3 * vx3 + vy3 * vy3 + vw3 * vw3)
    vx3, vy3, vw3 = vx3 / n3, vy3 / n3, vw3 / n3
    h = len(img)
    w = len(img[0])
    total = 0.0
    for r in range(h):
        for c in range(w):
            m = mag[r][c]
            if m < mag_eps:
                continue
            rx = vx3 - c * vw3
            ry = vy3 - r * vw3
            rn = math.sqrt(rx * rx + ry * ry)
            if rn < 1e-9:
                continue
            vx, vy = rx / rn, ry / rn
            dx, dy = -gy[r][c] / m, gx[r][c] / m
            dot = abs(dx * vx + dy * vy)
            cross = abs(dx * vy - dy * vx)
            if mode == "dot_product":
                weight = min(dot, 1.0)
            else:
                # arccos(|d.v|) written as atan2(|d x v|, |d . v|)
                theta = math.atan2(cross, dot)
                z = steepness * (theta_thresh - theta)
                weight = 1.0 / (1.0 + math.exp(-z)) if z >= 0 else math.exp(z) / (1.0 + math.exp(z))
            total += m * weight
    return total


def naive_vp_loss(pred, gt, vps, theta_thresh, steepness, mag_eps, mode):
    n = len(vps)
    acc = 0.0
    for vp in vps:
        sp = naive_vp_score(pred, vp, theta_thresh, steepness, mag_eps, mode)
        sg = naive_vp_score(gt, vp, theta_thresh, steepness, mag_eps, mode)
        acc += (sg - sp) ** 2
    return acc / n
