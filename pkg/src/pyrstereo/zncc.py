"""Zero-mean normalized cross-correlation costs over a stereo level.

The matching cost between the block around a left pixel and the block
around a horizontally shifted right pixel is

    cost = sum((L - mean(L)) * (R - mean(R))) / (m * sigma_L * sigma_R)

over an odd (2n+1)x(2n+1) block of m pixels, where sigma is the root mean
squared deviation of the block.  The value lives in [-1, 1] and is clamped
there after roundoff.  Blocks always have full size thanks to replicate
padding; three situations yield the floor cost of -1 instead of a
correlation: a degenerate left block (sigma below ``sigma_eps``), a
degenerate right block, or a right-block center that falls outside the
image for the requested disparity.

:class:`CostEngine` evaluates these costs for a whole level.  It keeps a
running count of every (pixel, disparity) entry it computes in a
thread-safe :class:`EvalCounter`; the counts are the basis of all
complexity accounting downstream.  Whole-plane evaluation uses box sums so
a full search is O(1) per pixel per disparity; sparse per-pixel requests
use direct block products.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.ndimage import uniform_filter

__all__ = [
    "SIGN_MIDDLEBURY",
    "SIGN_PAPER_PLUS",
    "PatchStats",
    "DsiSlice",
    "EvalCounter",
    "CostEngine",
    "patch_stats",
    "zncc",
    "dsi_entry",
    "averaged_dsi",
]

# Matching direction for rectified pairs: a left-image feature sits at a
# smaller column in the right image, so the right center is (i, j - z).
SIGN_MIDDLEBURY = "middlebury"
# Literal (i, j + z) form, selectable for pairs rectified the other way.
SIGN_PAPER_PLUS = "paper"

_GATHER_CHUNK = 32768

# Eight-connected neighborhood plus the center, used for cost averaging.
NEIGHBORHOOD_3X3 = tuple(
    (di, dj) for di in (-1, 0, 1) for dj in (-1, 0, 1)
)


@dataclass(frozen=True)
class PatchStats:
    """Mean and RMS deviation of one matching block."""

    mean: float
    sigma: float


@dataclass
class DsiSlice:
    """Costs of one pixel across candidate disparities.

    ``evaluated`` flags the entries that were actually computed; the rest
    hold the floor cost and were never requested.
    """

    pixel: tuple[int, int]
    costs: np.ndarray
    evaluated: np.ndarray | None = None

    def __post_init__(self):
        if self.evaluated is None:
            self.evaluated = np.ones(self.costs.shape, dtype=bool)


class EvalCounter:
    """Exact, thread-safe tally of cost evaluations."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._count = 0

    def add(self, n: int) -> None:
        with self._lock:
            self._count += int(n)

    @property
    def count(self) -> int:
        return self._count

    def reset(self) -> None:
        with self._lock:
            self._count = 0


def _clipped_patch(img: np.ndarray, i: int, j: int, half: int) -> np.ndarray:
    """Full-size block around (i, j) under replicate padding."""
    h, w = img.shape
    if not (0 <= i < h and 0 <= j < w):
        raise ValueError(f"center ({i}, {j}) outside {h}x{w} image")
    rows = np.clip(np.arange(i - half, i + half + 1), 0, h - 1)
    cols = np.clip(np.arange(j - half, j + half + 1), 0, w - 1)
    return img[np.ix_(rows, cols)]


def patch_stats(img: np.ndarray, center: tuple[int, int], half: int) -> PatchStats:
    """Mean and RMS deviation of the block around ``center``."""
    patch = _clipped_patch(np.asarray(img, dtype=np.float64), center[0], center[1], half)
    mean = float(patch.mean())
    dev = patch - mean
    return PatchStats(mean=mean, sigma=float(np.sqrt((dev * dev).mean())))


def zncc(left: np.ndarray, right: np.ndarray, center_l: tuple[int, int],
         center_r: tuple[int, int], half: int, sigma_eps: float = 1e-6) -> float:
    """Correlate the blocks around two pixel centers.

    Returns a value in [-1, 1]; either block being degenerate (RMS
    deviation below ``sigma_eps``) yields -1.  Centers outside their image
    raise ValueError.
    """
    lp = _clipped_patch(np.asarray(left, dtype=np.float64), center_l[0], center_l[1], half)
    rp = _clipped_patch(np.asarray(right, dtype=np.float64), center_r[0], center_r[1], half)
    m = lp.size
    ld = lp - lp.mean()
    rd = rp - rp.mean()
    lss = float((ld * ld).sum())
    rss = float((rd * rd).sum())
    if np.sqrt(lss / m) < sigma_eps or np.sqrt(rss / m) < sigma_eps:
        return -1.0
    value = float((ld * rd).sum()) / np.sqrt(lss * rss)
    return float(min(1.0, max(-1.0, value)))


class CostEngine:
    """Disparity-cost evaluator for one pyramid level.

    Block means and deviations are precomputed once per image with box
    filters under replicate borders, so every evaluation path shares the
    same statistics and degeneracy decisions.
    """

    def __init__(self, left: np.ndarray, right: np.ndarray, block: int, d_max: int,
                 sigma_eps: float = 1e-6, sign: str = SIGN_MIDDLEBURY,
                 counter: EvalCounter | None = None) -> None:
        left = np.ascontiguousarray(left, dtype=np.float64)
        right = np.ascontiguousarray(right, dtype=np.float64)
        if left.ndim != 2 or left.shape != right.shape:
            raise ValueError(f"left/right shapes differ: {left.shape} vs {right.shape}")
        if block < 3 or block % 2 == 0:
            raise ValueError(f"block must be odd and >= 3, got {block}")
        if d_max < 0:
            raise ValueError(f"d_max must be >= 0, got {d_max}")
        if sign not in (SIGN_MIDDLEBURY, SIGN_PAPER_PLUS):
            raise ValueError(f"unknown sign convention {sign!r}")

        self.height, self.width = left.shape
        self.block = block
        self.half = block // 2
        self.area = block * block
        self.d_max = int(d_max)
        self.sigma_eps = float(sigma_eps)
        self.sign = sign
        self.counter = counter if counter is not None else EvalCounter()

        self._lp = np.pad(left, self.half, mode="edge")
        self._rp = np.pad(right, self.half, mode="edge")
        self._lwin = sliding_window_view(self._lp, (block, block))
        self._rwin = sliding_window_view(self._rp, (block, block))

        self.mean_l, self.sigma_l = self._stats(left)
        self.mean_r, self.sigma_r = self._stats(right)
        self._ok_l = self.sigma_l >= self.sigma_eps
        self._ok_r = self.sigma_r >= self.sigma_eps

    def _stats(self, img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        mean = uniform_filter(img, size=self.block, mode="nearest")
        mean_sq = uniform_filter(img * img, size=self.block, mode="nearest")
        var = np.maximum(mean_sq - mean * mean, 0.0)
        return mean, np.sqrt(var)

    def _right_cols(self, j: np.ndarray | int, z: np.ndarray | int):
        if self.sign == SIGN_MIDDLEBURY:
            return j - z
        return j + z

    def _check_z(self, z: int) -> int:
        z = int(z)
        if not 0 <= z <= self.d_max:
            raise ValueError(f"disparity {z} outside [0, {self.d_max}]")
        return z

    def plane(self, z: int) -> np.ndarray:
        """Costs of every pixel at one disparity, via box sums."""
        z = self._check_z(z)
        h, w, b = self.height, self.width, self.block
        lp, rp = self._lp, self._rp

        # Cross sums over matching blocks: multiply the padded images at
        # the z-column offset, then take valid-mode box sums. Columns that
        # never feed an in-range center are left at zero.
        prod = np.zeros_like(lp)
        if z == 0:
            np.multiply(lp, rp, out=prod)
        elif self.sign == SIGN_MIDDLEBURY:
            np.multiply(lp[:, z:], rp[:, :-z], out=prod[:, z:])
        else:
            np.multiply(lp[:, :-z], rp[:, z:], out=prod[:, :-z])
        cross = _valid_box_sum(prod, b)

        cols = self._right_cols(np.arange(w), z)
        in_range = (cols >= 0) & (cols <= w - 1)
        safe = np.clip(cols, 0, w - 1)
        mean_r = self.mean_r[:, safe]
        sigma_r = self.sigma_r[:, safe]
        ok = self._ok_l & self._ok_r[:, safe] & in_range[np.newaxis, :]

        cov = cross / self.area - self.mean_l * mean_r
        denom = np.where(ok, self.sigma_l * sigma_r, 1.0)
        cost = np.where(ok, np.clip(cov / denom, -1.0, 1.0), -1.0)
        self.counter.add(h * w)
        return cost

    def full_volume(self, workers: int = 1) -> np.ndarray:
        """All planes stacked as (d_max+1, H, W).

        Planes are independent, so the result is bit-identical for any
        worker count.
        """
        volume = np.empty((self.d_max + 1, self.height, self.width))
        if workers <= 1:
            for z in range(self.d_max + 1):
                volume[z] = self.plane(z)
        else:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=workers) as pool:
                for z, cost in enumerate(pool.map(self.plane, range(self.d_max + 1))):
                    volume[z] = cost
        return volume

    def at(self, rows: np.ndarray, cols: np.ndarray, z: np.ndarray) -> np.ndarray:
        """Costs of arbitrary (pixel, disparity) triples.

        All three arrays share a shape; each entry counts as one
        evaluation, including out-of-range ones that return -1.
        """
        rows = np.asarray(rows, dtype=np.intp).ravel()
        cols = np.asarray(cols, dtype=np.intp).ravel()
        z = np.asarray(z, dtype=np.intp).ravel()
        if not (rows.shape == cols.shape == z.shape):
            raise ValueError("rows, cols and z must have identical shapes")
        if z.size and (z.min() < 0 or z.max() > self.d_max):
            raise ValueError(f"disparities outside [0, {self.d_max}]")

        out = np.empty(rows.shape[0])
        for start in range(0, rows.shape[0], _GATHER_CHUNK):
            sl = slice(start, start + _GATHER_CHUNK)
            out[sl] = self._gather(rows[sl], cols[sl], z[sl])
        self.counter.add(rows.shape[0])
        return out

    def _gather(self, rows, cols, z):
        w = self.width
        rcols = self._right_cols(cols, z)
        in_range = (rcols >= 0) & (rcols <= w - 1)
        safe = np.clip(rcols, 0, w - 1)

        lpat = self._lwin[rows, cols]
        rpat = self._rwin[rows, safe]
        cross = np.einsum("spq,spq->s", lpat, rpat)

        mean_r = self.mean_r[rows, safe]
        sigma_r = self.sigma_r[rows, safe]
        ok = self._ok_l[rows, cols] & self._ok_r[rows, safe] & in_range
        cov = cross / self.area - self.mean_l[rows, cols] * mean_r
        denom = np.where(ok, self.sigma_l[rows, cols] * sigma_r, 1.0)
        return np.where(ok, np.clip(cov / denom, -1.0, 1.0), -1.0)

    def dsi_rows(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        """Full cost vectors for a sparse pixel set, shape (S, d_max+1)."""
        rows = np.asarray(rows, dtype=np.intp).ravel()
        cols = np.asarray(cols, dtype=np.intp).ravel()
        if rows.shape != cols.shape:
            raise ValueError("rows and cols must have identical shapes")
        out = np.empty((rows.shape[0], self.d_max + 1))
        for start in range(0, rows.shape[0], _GATHER_CHUNK):
            sl = slice(start, start + _GATHER_CHUNK)
            r, c = rows[sl], cols[sl]
            for z in range(self.d_max + 1):
                out[sl, z] = self._gather(r, c, np.full(r.shape, z, dtype=np.intp))
        self.counter.add(rows.shape[0] * (self.d_max + 1))
        return out

    def dsi_slice(self, i: int, j: int) -> DsiSlice:
        """Cost vector of one pixel across all candidate disparities."""
        costs = self.dsi_rows(np.array([i]), np.array([j]))[0]
        return DsiSlice(pixel=(int(i), int(j)), costs=costs)


def _valid_box_sum(arr: np.ndarray, size: int) -> np.ndarray:
    """Box sums of every fully contained size x size window."""
    integral = np.zeros((arr.shape[0] + 1, arr.shape[1] + 1))
    integral[1:, 1:] = arr.cumsum(axis=0).cumsum(axis=1)
    return (
        integral[size:, size:]
        - integral[:-size, size:]
        - integral[size:, :-size]
        + integral[:-size, :-size]
    )


def dsi_entry(engine: CostEngine, i: int, j: int, z: int) -> float:
    """Cost of one pixel at one candidate disparity.

    Raises ValueError when z is outside [0, d_max]; a right-block center
    that leaves the image returns the floor cost -1 instead.
    """
    z = engine._check_z(z)
    return float(engine.at(np.array([i]), np.array([j]), np.array([z]))[0])


def averaged_dsi(engine: CostEngine, i: int, j: int,
                 neighborhood=NEIGHBORHOOD_3X3) -> DsiSlice:
    """Summed cost vector over a pixel's neighborhood.

    Out-of-bounds neighbors are dropped; when none survive clipping the
    pixel's own costs are returned.  The argmax of the sum equals the
    argmax of the mean, so the sum is stored as-is.
    """
    coords = [
        (i + di, j + dj)
        for di, dj in neighborhood
        if 0 <= i + di < engine.height and 0 <= j + dj < engine.width
    ]
    if not coords:
        return engine.dsi_slice(i, j)
    rows = np.array([c[0] for c in coords])
    cols = np.array([c[1] for c in coords])
    summed = engine.dsi_rows(rows, cols).sum(axis=0)
    return DsiSlice(pixel=(int(i), int(j)), costs=summed)
