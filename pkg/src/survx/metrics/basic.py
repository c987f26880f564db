"""Pixel-space quality measures: MSE/PSNR and SSIM."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import DimMismatch, TooSmall
from ..image import ImageTensor, rgb_to_luma


def mse_psnr(x: ImageTensor, y: ImageTensor) -> tuple[float, float]:
    """Mean squared error and 10*log10(1/mse) dB; psnr is +inf when mse is 0."""
    if x.data.shape != y.data.shape:
        raise DimMismatch(f"{x.data.shape} vs {y.data.shape}")
    mse = float(np.mean((x.data - y.data) ** 2))
    psnr = math.inf if mse == 0.0 else 10.0 * math.log10(1.0 / mse)
    return mse, psnr


@dataclass(frozen=True)
class SsimParams:
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 1.0
    window_size: int = 11
    sigma: float = 1.5

    @property
    def c1(self) -> float:
        return (self.k1 * self.dynamic_range) ** 2

    @property
    def c2(self) -> float:
        return (self.k2 * self.dynamic_range) ** 2

    def window(self) -> np.ndarray:
        """Normalized 2-D Gaussian window."""
        half = (self.window_size - 1) / 2.0
        coords = np.arange(self.window_size) - half
        g = np.exp(-(coords ** 2) / (2.0 * self.sigma ** 2))
        w = np.outer(g, g)
        return w / w.sum()


def _to_plane(img: ImageTensor) -> np.ndarray:
    if img.channels == 3:
        img = rgb_to_luma(img)
    return img.data[0]


def ssim(x: ImageTensor, y: ImageTensor,
         params: SsimParams = SsimParams()) -> tuple[float, np.ndarray]:
    """Mean SSIM and the per-position map over valid window placements.

    Local moments use the Gaussian window; no padding, so the map is
    (H-10) x (W-10) for the default 11x11 window.
    """
    if (x.height, x.width) != (y.height, y.width):
        raise DimMismatch(f"{x.height}x{x.width} vs {y.height}x{y.width}")
    n = params.window_size
    if x.height < n or x.width < n:
        raise TooSmall(f"image {x.height}x{x.width} below the {n}x{n} window")
    a = _to_plane(x)
    b = _to_plane(y)
    w = params.window()

    def moments(p: np.ndarray) -> np.ndarray:
        return np.einsum("hwij,ij->hw", sliding_window_view(p, (n, n)), w)

    mu_a = moments(a)
    mu_b = moments(b)
    var_a = moments(a * a) - mu_a ** 2
    var_b = moments(b * b) - mu_b ** 2
    cov = moments(a * b) - mu_a * mu_b

    c1, c2 = params.c1, params.c2
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)
    ssim_map = num / den
    return float(ssim_map.mean()), ssim_map
