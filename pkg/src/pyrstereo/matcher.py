"""Coarse-to-fine block matching over a Gaussian stereo pyramid.

The coarsest level is solved by full disparity search.  Each finer level
then receives the previous disparity and cost maps, upsampled, as a prior:
pixels whose interpolated cost clears the trust threshold ``beta`` are
searched only in a three-candidate window around twice the coarse
disparity, everything else falls back to a full search.  After selection,
each level runs two confidence-gated repairs controlled by ``alpha``:

* low-cost pixels are re-selected on the cost vectors summed over their
  3x3 neighborhood (a disparity is trusted when nearby searches agree);
* remaining low-cost pixels take the median of the confident disparities
  in their 5x5 window.

All maps are float64; disparities are integer-valued with NaN marking
pixels that carry no usable value.  Stages never mutate their inputs, and
results are independent of the worker count.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.ndimage import binary_dilation, map_coordinates

from .pyramid import StereoPyramid, build_pyramid
from .zncc import SIGN_MIDDLEBURY, SIGN_PAPER_PLUS, CostEngine, EvalCounter

__all__ = [
    "ConfigError",
    "MatchConfig",
    "LevelTrace",
    "PipelineTrace",
    "SelectionStats",
    "match_coarsest",
    "refine_level",
    "upsample_prior",
    "select_with_prior",
    "match_level_with_prior",
    "selective_median",
    "run_pipeline",
]


class ConfigError(ValueError):
    """A matching parameter is outside its legal range."""


@dataclass(frozen=True)
class MatchConfig:
    """Parameters of one matching run.

    ``levels=None`` selects the pyramid depth automatically.  ``alpha``
    gates the neighborhood re-selection and median repair; ``beta`` gates
    trust in the upsampled prior.  ``sign`` picks the column direction of
    the right-image search (see :mod:`pyrstereo.zncc`).
    """

    d_max: int
    levels: int | None = None
    block: int = 11
    alpha: float = 0.9
    beta: float = 0.9
    sigma_eps: float = 1e-6
    sign: str = SIGN_MIDDLEBURY

    def __post_init__(self) -> None:
        if self.d_max < 1:
            raise ConfigError(f"d_max must be >= 1, got {self.d_max}")
        if self.levels is not None and self.levels < 0:
            raise ConfigError(f"levels must be >= 0, got {self.levels}")
        if self.block < 3 or self.block % 2 == 0:
            raise ConfigError(f"block must be odd and >= 3, got {self.block}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0.0 < self.beta < 1.0:
            raise ConfigError(f"beta must lie in (0, 1), got {self.beta}")
        if self.sigma_eps <= 0.0:
            raise ConfigError(f"sigma_eps must be positive, got {self.sigma_eps}")
        if self.sign not in (SIGN_MIDDLEBURY, SIGN_PAPER_PLUS):
            raise ConfigError(f"unknown sign convention {self.sign!r}")


@dataclass
class SelectionStats:
    """Bookkeeping of one prior-guided selection pass."""

    trusted: int = 0
    trusted_evals: int = 0
    window_max: int = 0
    full_search_pixels: int = 0
    evals: int = 0


@dataclass
class LevelTrace:
    """Exact per-level counters plus stage wall times."""

    level: int
    height: int
    width: int
    d_max: int
    block: int
    trusted: int = 0
    trusted_evals: int = 0
    trusted_window_max: int = 0
    full_search_pixels: int = 0
    selection_evals: int = 0
    refined: int = 0
    refine_evals: int = 0
    median_replaced: int = 0
    seconds: dict = field(default_factory=dict)

    @property
    def pixels(self) -> int:
        return self.height * self.width

    @property
    def trusted_fraction(self) -> float:
        return self.trusted / self.pixels if self.pixels else 0.0

    @property
    def evals(self) -> int:
        return self.selection_evals + self.refine_evals

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "height": self.height,
            "width": self.width,
            "d_max": self.d_max,
            "block": self.block,
            "pixels": self.pixels,
            "trusted": self.trusted,
            "trusted_fraction": self.trusted_fraction,
            "trusted_evals": self.trusted_evals,
            "trusted_window_max": self.trusted_window_max,
            "full_search_pixels": self.full_search_pixels,
            "selection_evals": self.selection_evals,
            "refined": self.refined,
            "refine_evals": self.refine_evals,
            "median_replaced": self.median_replaced,
            "seconds": dict(self.seconds),
        }


@dataclass
class PipelineTrace:
    """Counters for a full run, coarsest level first."""

    levels: list[LevelTrace] = field(default_factory=list)
    build_seconds: float = 0.0
    total_seconds: float = 0.0

    @property
    def total_evals(self) -> int:
        return sum(lt.evals for lt in self.levels)

    @property
    def trust_fractions(self) -> tuple[float, ...]:
        return tuple(lt.trusted_fraction for lt in self.levels)

    def to_dict(self) -> dict:
        return {
            "levels": [lt.to_dict() for lt in self.levels],
            "total_evals": self.total_evals,
            "build_seconds": self.build_seconds,
            "total_seconds": self.total_seconds,
        }

    def counts_dict(self) -> dict:
        """Counters only, with wall times stripped (for determinism checks)."""
        out = self.to_dict()
        out.pop("build_seconds")
        out.pop("total_seconds")
        for level in out["levels"]:
            level.pop("seconds")
        return out


def match_coarsest(engine: CostEngine, workers: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Full-search disparity and cost maps for one level.

    Every pixel is evaluated at every candidate disparity (d_max+1 entries
    recorded per pixel); ties pick the smallest disparity.
    """
    volume = engine.full_volume(workers=workers)
    disparity = np.argmax(volume, axis=0)
    cost = np.take_along_axis(volume, disparity[np.newaxis], axis=0)[0]
    return disparity.astype(np.float64), cost


def refine_level(engine: CostEngine, disparity: np.ndarray, cost: np.ndarray,
                 alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Re-select low-confidence pixels on neighborhood-summed cost vectors.

    Pixels with cost above ``alpha`` pass through untouched.  The rest take
    the disparity with the best cost summed over their (clipped) 3x3
    neighborhood; the stored cost is that sum divided by the neighborhood
    size, so it stays comparable to ``alpha`` at later gates.
    """
    low = cost <= alpha
    if not low.any():
        return disparity.copy(), cost.copy()

    h, w = cost.shape
    needed = binary_dilation(low, structure=np.ones((3, 3), dtype=bool))
    nrows, ncols = np.nonzero(needed)
    rows_dsi = engine.dsi_rows(nrows, ncols)

    # Map image coordinates of evaluated pixels into row indices of rows_dsi.
    index = np.full((h, w), -1, dtype=np.intp)
    index[nrows, ncols] = np.arange(nrows.shape[0])

    li, lj = np.nonzero(low)
    summed = np.zeros((li.shape[0], engine.d_max + 1))
    members = np.zeros(li.shape[0])
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            qi, qj = li + di, lj + dj
            inside = (qi >= 0) & (qi < h) & (qj >= 0) & (qj < w)
            summed[inside] += rows_dsi[index[qi[inside], qj[inside]]]
            members[inside] += 1.0

    best = np.argmax(summed, axis=1)
    new_d = disparity.copy()
    new_c = cost.copy()
    new_d[li, lj] = best.astype(np.float64)
    new_c[li, lj] = summed[np.arange(li.shape[0]), best] / members
    return new_d, new_c


def upsample_prior(d_coarse: np.ndarray, c_coarse: np.ndarray,
                   target_shape: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    """Upsample coarse maps to the next finer level.

    Disparities replicate nearest-neighbor blocks and are doubled to
    convert them to the finer level's pixel units; NaN passes through.
    Costs are interpolated bicubically and clamped back into [-1, 1].
    The target must be the dyadic parent of the coarse maps.
    """
    h, w = target_shape
    ch, cw = d_coarse.shape
    if c_coarse.shape != (ch, cw):
        raise ValueError("disparity and cost maps differ in shape")
    if ch != (h + 1) // 2 or cw != (w + 1) // 2:
        raise ValueError(
            f"{ch}x{cw} maps cannot upsample to {h}x{w}: not the dyadic parent"
        )

    d_hat = 2.0 * np.repeat(np.repeat(d_coarse, 2, axis=0), 2, axis=1)[:h, :w]

    yi = (np.arange(h) + 0.5) * (ch / h) - 0.5
    xi = (np.arange(w) + 0.5) * (cw / w) - 0.5
    grid = np.meshgrid(yi, xi, indexing="ij")
    c_hat = map_coordinates(c_coarse, grid, order=3, mode="nearest")
    return d_hat, np.clip(c_hat, -1.0, 1.0)


def select_with_prior(engine: CostEngine, d_hat: np.ndarray, c_hat: np.ndarray,
                      beta: float) -> tuple[np.ndarray, np.ndarray, SelectionStats]:
    """Disparity selection guided by an upsampled prior.

    Pixels whose interpolated cost exceeds ``beta`` are evaluated only at
    the candidates {d_hat-1, d_hat, d_hat+1} clipped to [0, d_max] (at most
    three evaluations); all other pixels, including those whose prior is
    NaN or leaves no legal candidate, get a full search.  Ties pick the
    smallest disparity in both branches.
    """
    h, w = c_hat.shape
    if d_hat.shape != (h, w) or (engine.height, engine.width) != (h, w):
        raise ValueError("prior maps must match the level dimensions")
    d_max = engine.d_max

    finite = np.isfinite(d_hat)
    center = np.where(finite, d_hat, 0.0).astype(np.intp)
    window_ok = finite & (center + 1 >= 0) & (center - 1 <= d_max)
    trusted = (c_hat > beta) & window_ok

    disparity = np.empty((h, w))
    cost = np.empty((h, w))
    stats = SelectionStats(trusted=int(trusted.sum()))

    before = engine.counter.count
    if stats.trusted:
        ti, tj = np.nonzero(trusted)
        tz = center[ti, tj]
        best_c = np.full(ti.shape[0], -2.0)
        best_z = np.zeros(ti.shape[0], dtype=np.intp)
        window_size = np.zeros(ti.shape[0], dtype=np.intp)
        for offset in (-1, 0, 1):  # ascending keeps smallest-z tie-breaking
            z = tz + offset
            legal = (z >= 0) & (z <= d_max)
            if not legal.any():
                continue
            window_size[legal] += 1
            c = engine.at(ti[legal], tj[legal], z[legal])
            improve = c > best_c[legal]
            sel = np.nonzero(legal)[0][improve]
            best_c[sel] = c[improve]
            best_z[sel] = z[legal][improve]
        disparity[ti, tj] = best_z.astype(np.float64)
        cost[ti, tj] = best_c
        stats.window_max = int(window_size.max())
        stats.trusted_evals = engine.counter.count - before

    full = ~trusted
    stats.full_search_pixels = int(full.sum())
    if stats.full_search_pixels:
        fi, fj = np.nonzero(full)
        rows = engine.dsi_rows(fi, fj)
        best = np.argmax(rows, axis=1)
        disparity[fi, fj] = best.astype(np.float64)
        cost[fi, fj] = rows[np.arange(fi.shape[0]), best]

    stats.evals = engine.counter.count - before
    return disparity, cost, stats


def selective_median(disparity: np.ndarray, cost: np.ndarray,
                     alpha: float) -> np.ndarray:
    """Median repair of low-confidence disparities.

    Each pixel with cost at most ``alpha`` takes the median of the
    disparities in its 5x5 window whose own cost exceeds ``alpha`` (the
    window is clipped at borders, and the center never qualifies).  With an
    even count the lower middle element is used, so the result is always an
    existing disparity.  Pixels with no qualifying neighbor are kept.
    """
    if disparity.shape != cost.shape:
        raise ValueError("disparity and cost maps differ in shape")
    low = cost <= alpha
    if not low.any():
        return disparity.copy()

    # Pad costs below any legal alpha so clipped-away neighbors never qualify.
    cpad = np.pad(cost, 2, mode="constant", constant_values=-2.0)
    dpad = np.pad(disparity, 2, mode="constant", constant_values=0.0)
    cwin = sliding_window_view(cpad, (5, 5))
    dwin = sliding_window_view(dpad, (5, 5))

    li, lj = np.nonzero(low)
    cw = cwin[li, lj].reshape(li.shape[0], 25)
    dw = dwin[li, lj].reshape(li.shape[0], 25)
    qualifies = (cw > alpha) & np.isfinite(dw)
    counts = qualifies.sum(axis=1)

    pool = np.where(qualifies, dw, np.inf)
    pool.sort(axis=1)
    pick = np.maximum(counts - 1, 0) // 2
    medians = pool[np.arange(li.shape[0]), pick]

    out = disparity.copy()
    have = counts > 0
    out[li[have], lj[have]] = medians[have]
    return out


def match_level_with_prior(engine: CostEngine, d_hat: np.ndarray, c_hat: np.ndarray,
                           alpha: float, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """One finer level end to end: prior-guided selection, neighborhood
    re-selection, then median repair.  Returns the level's final maps."""
    disparity, cost, _ = select_with_prior(engine, d_hat, c_hat, beta)
    disparity, cost = refine_level(engine, disparity, cost, alpha)
    disparity = selective_median(disparity, cost, alpha)
    return disparity, cost


def _count_changed(before: np.ndarray, after: np.ndarray) -> int:
    both_nan = np.isnan(before) & np.isnan(after)
    return int(np.sum(~both_nan & (before != after)))


def _process_level(engine: CostEngine, trace: LevelTrace, alpha: float,
                   select) -> tuple[np.ndarray, np.ndarray]:
    """Run select/refine/median for one level, filling the trace."""
    t0 = time.perf_counter()
    disparity, cost = select()
    trace.seconds["select"] = time.perf_counter() - t0

    before = engine.counter.count
    trace.refined = int(np.sum(cost <= alpha))
    t0 = time.perf_counter()
    disparity, cost = refine_level(engine, disparity, cost, alpha)
    trace.seconds["refine"] = time.perf_counter() - t0
    trace.refine_evals = engine.counter.count - before

    t0 = time.perf_counter()
    filtered = selective_median(disparity, cost, alpha)
    trace.seconds["median"] = time.perf_counter() - t0
    trace.median_replaced = _count_changed(disparity, filtered)
    return filtered, cost


def run_pipeline(left: np.ndarray, right: np.ndarray, config: MatchConfig,
                 workers: int = 1,
                 pyramid: StereoPyramid | None = None,
                 ) -> tuple[np.ndarray, np.ndarray, PipelineTrace]:
    """Compute the full-resolution disparity and cost maps for a pair.

    Builds the pyramid (unless one is supplied), solves the coarsest level
    by full search, then walks down to level 0 reusing each level's result
    as the next one's prior.  Returns the level-0 maps and the complete
    trace of evaluation counters and stage timings.
    """
    t_start = time.perf_counter()
    if pyramid is None:
        t0 = time.perf_counter()
        pyramid = build_pyramid(left, right, config.d_max,
                                levels=config.levels, base_block=config.block)
        build_seconds = time.perf_counter() - t0
    else:
        build_seconds = 0.0

    counter = EvalCounter()
    trace = PipelineTrace(build_seconds=build_seconds)

    def _make_trace(level) -> LevelTrace:
        return LevelTrace(level=level.index, height=level.shape[0],
                          width=level.shape[1], d_max=level.d_max,
                          block=level.block)

    coarse = pyramid.coarsest
    engine = CostEngine(coarse.left, coarse.right, coarse.block, coarse.d_max,
                        sigma_eps=config.sigma_eps, sign=config.sign, counter=counter)
    ltrace = _make_trace(coarse)
    disparity, cost = _process_level(
        engine, ltrace, config.alpha,
        select=lambda: match_coarsest(engine, workers=workers),
    )
    ltrace.full_search_pixels = ltrace.pixels
    ltrace.selection_evals = ltrace.pixels * (coarse.d_max + 1)
    trace.levels.append(ltrace)

    for k in range(len(pyramid) - 2, -1, -1):
        level = pyramid[k]
        engine = CostEngine(level.left, level.right, level.block, level.d_max,
                            sigma_eps=config.sigma_eps, sign=config.sign,
                            counter=counter)
        ltrace = _make_trace(level)

        t0 = time.perf_counter()
        d_hat, c_hat = upsample_prior(disparity, cost, level.shape)
        ltrace.seconds["upsample"] = time.perf_counter() - t0

        stats_box: list[SelectionStats] = []

        def _select() -> tuple[np.ndarray, np.ndarray]:
            d, c, stats = select_with_prior(engine, d_hat, c_hat, config.beta)
            stats_box.append(stats)
            return d, c

        disparity, cost = _process_level(engine, ltrace, config.alpha, _select)
        stats = stats_box[0]
        ltrace.trusted = stats.trusted
        ltrace.trusted_evals = stats.trusted_evals
        ltrace.trusted_window_max = stats.window_max
        ltrace.full_search_pixels = stats.full_search_pixels
        ltrace.selection_evals = stats.evals
        trace.levels.append(ltrace)

    trace.total_seconds = time.perf_counter() - t_start
    return disparity, cost, trace
