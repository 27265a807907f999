"""Independent naive reference implementations used as test oracles.

Everything here is written as plain loops with extended-precision sums
(math.fsum), sharing no code with the package's optimized paths.  Slow on
purpose; correctness is the only goal.
"""

from __future__ import annotations

import math

import numpy as np

BINOMIAL_2D = np.outer([1, 4, 6, 4, 1], [1, 4, 6, 4, 1]) / 256.0


def clipped_patch(img, i, j, half):
    """Replicate-padded block around (i, j), by index clipping."""
    h, w = img.shape
    rows = [min(max(i + di, 0), h - 1) for di in range(-half, half + 1)]
    cols = [min(max(j + dj, 0), w - 1) for dj in range(-half, half + 1)]
    return np.array([[img[r, c] for c in cols] for r in rows])


def fsum_zncc(left_patch, right_patch, sigma_eps=1e-6):
    """Direct-summation ZNCC of two equal-size patches."""
    lp = np.asarray(left_patch, dtype=np.float64).ravel()
    rp = np.asarray(right_patch, dtype=np.float64).ravel()
    m = lp.size
    lmean = math.fsum(lp) / m
    rmean = math.fsum(rp) / m
    ldev = [v - lmean for v in lp]
    rdev = [v - rmean for v in rp]
    lss = math.fsum(v * v for v in ldev)
    rss = math.fsum(v * v for v in rdev)
    if math.sqrt(lss / m) < sigma_eps or math.sqrt(rss / m) < sigma_eps:
        return -1.0
    value = math.fsum(a * b for a, b in zip(ldev, rdev)) / math.sqrt(lss * rss)
    return min(1.0, max(-1.0, value))


def naive_cost(left, right, i, j, z, half, sigma_eps=1e-6, sign="middlebury"):
    """One (pixel, disparity) cost with the -1 out-of-range rule."""
    w = left.shape[1]
    col = j - z if sign == "middlebury" else j + z
    if col < 0 or col > w - 1:
        return -1.0
    return fsum_zncc(
        clipped_patch(left, i, j, half),
        clipped_patch(right, i, col, half),
        sigma_eps,
    )


def naive_dsi_vector(left, right, i, j, half, d_max, sigma_eps=1e-6,
                     sign="middlebury"):
    return np.array([
        naive_cost(left, right, i, j, z, half, sigma_eps, sign)
        for z in range(d_max + 1)
    ])


def naive_averaged_dsi(left, right, i, j, half, d_max, sigma_eps=1e-6):
    """Double-loop sum of neighbor cost vectors over the clipped 3x3."""
    h, w = left.shape
    total = np.zeros(d_max + 1)
    members = 0
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            m, n = i + di, j + dj
            if 0 <= m < h and 0 <= n < w:
                total += naive_dsi_vector(left, right, m, n, half, d_max, sigma_eps)
                members += 1
    return total, members


def naive_full_search(left, right, d_max, block, sigma_eps=1e-6, sign="middlebury"):
    """Quadruple-loop full search: the selection rule spelled out plainly."""
    h, w = left.shape
    half = block // 2
    disparity = np.zeros((h, w))
    cost = np.full((h, w), -1.0)
    for i in range(h):
        for j in range(w):
            best_c, best_z = -2.0, 0
            for z in range(d_max + 1):
                c = naive_cost(left, right, i, j, z, half, sigma_eps, sign)
                if c > best_c:
                    best_c, best_z = c, z
            disparity[i, j] = best_z
            cost[i, j] = best_c
    return disparity, cost


def naive_downsample(img):
    """Dense 5x5 binomial convolution (replicate borders), even decimation."""
    h, w = img.shape
    smoothed = np.zeros_like(img)
    for i in range(h):
        for j in range(w):
            acc = 0.0
            for di in range(-2, 3):
                for dj in range(-2, 3):
                    r = min(max(i + di, 0), h - 1)
                    c = min(max(j + dj, 0), w - 1)
                    acc += BINOMIAL_2D[di + 2, dj + 2] * img[r, c]
            smoothed[i, j] = acc
    return smoothed[::2, ::2]


def naive_selective_median(disparity, cost, alpha):
    """Collect, filter and sort each 5x5 window explicitly."""
    h, w = disparity.shape
    out = disparity.copy()
    for i in range(h):
        for j in range(w):
            if cost[i, j] > alpha:
                continue
            pool = []
            for di in range(-2, 3):
                for dj in range(-2, 3):
                    m, n = i + di, j + dj
                    if 0 <= m < h and 0 <= n < w and cost[m, n] > alpha:
                        pool.append(disparity[m, n])
            if pool:
                pool.sort()
                out[i, j] = pool[(len(pool) - 1) // 2]
    return out


def naive_nn_double(coarse, target_shape):
    """Nearest-neighbor upsample with doubling, by direct index mapping."""
    h, w = target_shape
    out = np.empty((h, w))
    for i in range(h):
        for j in range(w):
            out[i, j] = 2.0 * coarse[i // 2, j // 2]
    return out


def naive_metrics(disparity, gt_values, gt_invalid, scale=1.0, taus=(1.0, 2.0, 4.0)):
    """Per-pixel counting of bad-tau rates and mean absolute error."""
    h, w = disparity.shape
    bad = {tau: 0 for tau in taus}
    total_err = 0.0
    evaluated = 0
    n_gt_invalid = 0
    n_out_invalid = 0
    for i in range(h):
        for j in range(w):
            out_bad = not math.isfinite(disparity[i, j])
            if out_bad:
                n_out_invalid += 1
            if gt_invalid[i, j]:
                n_gt_invalid += 1
            if out_bad or gt_invalid[i, j]:
                continue
            err = abs(disparity[i, j] * scale - gt_values[i, j])
            evaluated += 1
            total_err += err
            for tau in taus:
                if err > tau:
                    bad[tau] += 1
    rates = {tau: (100.0 * bad[tau] / evaluated if evaluated else 0.0) for tau in taus}
    avg = total_err / evaluated if evaluated else 0.0
    return rates, avg, evaluated, n_gt_invalid, n_out_invalid
