"""Synthetic stereo pairs with known disparity.

A pair is carved from one textured canvas so that
``right[i, j] == left[i, j + shift]`` exactly: the true disparity of every
left pixel (away from the occluded left margin) is the constant ``shift``.
Because the right image is a literal column shift, matching costs peak at
exactly the true disparity, which makes these pairs a ground-truth oracle
for search and pipeline tests.

The texture is noise low-passed with a hard frequency cutoff.  Like
natural images, and unlike raw noise, its content survives pyramid
downsampling: blocks still correlate strongly across the sub-pixel
misalignments that coarse levels see, which is what the trust gates of the
coarse-to-fine matcher rely on.
"""

from __future__ import annotations

import numpy as np

__all__ = ["shifted_pair", "interior_mask"]


def _bandlimited_noise(rng: np.random.Generator, height: int, width: int,
                       cutoff: float) -> np.ndarray:
    spectrum = np.fft.rfft2(rng.standard_normal((height, width)))
    fy = np.fft.fftfreq(height)[:, np.newaxis]
    fx = np.fft.rfftfreq(width)[np.newaxis, :]
    spectrum[(fy * fy + fx * fx) > cutoff * cutoff] = 0.0
    return np.fft.irfft2(spectrum, s=(height, width))


def shifted_pair(height: int, width: int, shift: int,
                 rng: np.random.Generator | None = None,
                 cutoff: float = 0.03) -> tuple[np.ndarray, np.ndarray]:
    """Textured pair satisfying ``right[i, j] == left[i, j + shift]``.

    ``cutoff`` is the texture's maximum spatial frequency in cycles per
    pixel; raise it for livelier texture on small images.
    """
    if shift < 0:
        raise ValueError(f"shift must be >= 0, got {shift}")
    if not 0.0 < cutoff <= 0.5:
        raise ValueError(f"cutoff must lie in (0, 0.5], got {cutoff}")
    if rng is None:
        rng = np.random.default_rng()
    canvas = _bandlimited_noise(rng, height, width + shift, cutoff)
    # Normalize intensities into [0, 1].
    canvas = (canvas - canvas.min()) / max(np.ptp(canvas), 1e-12)
    left = np.ascontiguousarray(canvas[:, :width])
    right = np.ascontiguousarray(canvas[:, shift:])
    return left, right


def interior_mask(shape: tuple[int, int], shift: int, block: int,
                  extra: int = 0) -> np.ndarray:
    """Pixels whose true match and full block lie inside both images.

    Excludes the left margin occluded by the shift and a border of half a
    block (plus ``extra``) on every side.
    """
    height, width = shape
    margin = block // 2 + extra
    mask = np.zeros((height, width), dtype=bool)
    top, bottom = margin, height - margin
    lead = max(margin + shift, margin)
    if bottom > top and width - margin > lead:
        mask[top:bottom, lead : width - margin] = True
    return mask
