"""Antialiased separable bicubic resampling (Keys kernel, a = -0.5).

Matches the classic MATLAB-style resizer: half-pixel-centered coordinate
mapping, clamp-to-edge, kernel width scaled by the scale factor when
downscaling, and per-output-pixel weight renormalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTarget, NotDivisible
from .image import ImageTensor

DEFAULT_A = -0.5


@dataclass(frozen=True)
class ResampleSpec:
    out_height: int
    out_width: int
    antialias: bool = True
    kernel_a: float = DEFAULT_A

    def __post_init__(self):
        if self.out_height < 1 or self.out_width < 1:
            raise DegenerateTarget(f"target {self.out_height}x{self.out_width}")


def cubic_kernel(t: float, a: float = DEFAULT_A) -> float:
    """Keys piecewise cubic; 1 at t=0, 0 at |t| in {1, 2}, 0 beyond."""
    t = abs(t)
    if t <= 1.0:
        return (a + 2.0) * t**3 - (a + 3.0) * t**2 + 1.0
    if t < 2.0:
        return a * t**3 - 5.0 * a * t**2 + 8.0 * a * t - 4.0 * a
    return 0.0


def _axis_weights(n_in: int, n_out: int, antialias: bool, a: float):
    """Tap indices (n_out, taps) and renormalized weights for one axis."""
    scale = n_out / n_in
    s = scale if (antialias and scale < 1.0) else 1.0
    width = 4.0 / s
    taps = int(math.ceil(width)) + 2
    out_idx = np.arange(n_out, dtype=np.float64)
    u = (out_idx + 0.5) / scale - 0.5
    left = np.floor(u - width / 2.0).astype(np.int64)
    idx = left[:, None] + np.arange(taps)[None, :]
    t = s * (u[:, None] - idx)
    w = np.array([[s * cubic_kernel(v, a) for v in row] for row in t])
    w /= w.sum(axis=1, keepdims=True)
    idx = np.clip(idx, 0, n_in - 1)
    return idx, w


def _resample_axis(arr: np.ndarray, n_out: int, axis: int, antialias: bool, a: float) -> np.ndarray:
    n_in = arr.shape[axis]
    idx, w = _axis_weights(n_in, n_out, antialias, a)
    moved = np.moveaxis(arr, axis, -1)
    gathered = moved[..., idx]            # (..., n_out, taps)
    out = np.einsum("...ot,ot->...o", gathered, w)
    return np.moveaxis(out, -1, axis)


def resize_array(data: np.ndarray, out_height: int, out_width: int,
                 antialias: bool = True, kernel_a: float = DEFAULT_A) -> np.ndarray:
    """Separable resize of a raw (c, h, w) array; no range clamping."""
    if out_height < 1 or out_width < 1:
        raise DegenerateTarget(f"target {out_height}x{out_width}")
    out = _resample_axis(np.asarray(data, dtype=np.float64), out_height, 1, antialias, kernel_a)
    return _resample_axis(out, out_width, 2, antialias, kernel_a)


def resize(img: ImageTensor, spec: ResampleSpec) -> ImageTensor:
    """Separable resize (rows then columns), output clamped to [0, 1]."""
    out = resize_array(img.data, spec.out_height, spec.out_width,
                       spec.antialias, spec.kernel_a)
    return ImageTensor(np.clip(out, 0.0, 1.0))


def resize_to(img: ImageTensor, out_height: int, out_width: int,
              antialias: bool = True, kernel_a: float = DEFAULT_A) -> ImageTensor:
    return resize(img, ResampleSpec(out_height, out_width, antialias, kernel_a))


def degrade(hr: ImageTensor, factor: int) -> ImageTensor:
    """Antialiased bicubic downscale by an integer factor."""
    if hr.height % factor or hr.width % factor:
        raise NotDivisible(
            f"{hr.height}x{hr.width} not divisible by {factor}; crop first"
        )
    return resize(hr, ResampleSpec(hr.height // factor, hr.width // factor, antialias=True))


def degrade_x4(hr: ImageTensor) -> ImageTensor:
    """The x4 low-resolution degradation used throughout the pipeline."""
    return degrade(hr, 4)


def crop_to_multiple(img: ImageTensor, factor: int) -> ImageTensor:
    """Trim bottom/right rows so both dims divide by factor."""
    h = (img.height // factor) * factor
    w = (img.width // factor) * factor
    if h < factor or w < factor:
        raise NotDivisible(f"image {img.height}x{img.width} smaller than factor {factor}")
    return ImageTensor(img.data[:, :h, :w])
