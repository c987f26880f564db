"""Frechet distance between Gaussian fits of feature populations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import (
    DimMismatch,
    NotSymmetric,
    SignificantlyNegativeEigenvalue,
    TooFewSamples,
)
from ..image import ImageTensor
from .features import FeatureExtractorSpec, extract_features

_SYM_TOL = 1e-8
_EIG_TOL = 1e-8


@dataclass(frozen=True)
class GaussianStats:
    mean: np.ndarray   # (d,)
    cov: np.ndarray    # (d, d), symmetric PSD
    n: int

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


def gaussian_stats(features) -> GaussianStats:
    """Sample mean and unbiased covariance of row vectors, symmetrized."""
    arr = np.asarray(features, dtype=np.float64)
    if arr.ndim != 2:
        raise DimMismatch(f"expected (n, d) features, got shape {arr.shape}")
    n = arr.shape[0]
    if n < 2:
        raise TooFewSamples(f"need >= 2 samples, got {n}")
    mean = arr.mean(axis=0)
    centered = arr - mean
    cov = centered.T @ centered / (n - 1)
    cov = (cov + cov.T) / 2.0
    return GaussianStats(mean, cov, n)


def sqrtm_psd(m: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimMismatch(f"matrix shape {m.shape}")
    asym = np.abs(m - m.T).max() if m.size else 0.0
    if asym > _SYM_TOL * max(1.0, np.abs(m).max()):
        raise NotSymmetric(f"asymmetry {asym:.3e}")
    sym = (m + m.T) / 2.0
    vals, vecs = np.linalg.eigh(sym)
    floor = -_EIG_TOL * max(1.0, float(vals.max(initial=0.0)))
    if vals.min(initial=0.0) < floor:
        raise SignificantlyNegativeEigenvalue(f"eigenvalue {vals.min():.3e}")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def fid(a: GaussianStats, b: GaussianStats) -> float:
    """||mu_a - mu_b||^2 + Tr(cov_a + cov_b - 2 (cov_a^1/2 cov_b cov_a^1/2)^1/2).

    Uses the symmetric-product form for stability; tiny negative results
    (>= -1e-6) are clamped to 0.  Lower means the populations are closer.
    """
    if a.dim != b.dim:
        raise DimMismatch(f"feature dims {a.dim} vs {b.dim}")
    dmu = a.mean - b.mean
    root_a = sqrtm_psd(a.cov)
    inner = sqrtm_psd(root_a @ b.cov @ root_a)
    value = float(dmu @ dmu + np.trace(a.cov) + np.trace(b.cov) - 2.0 * np.trace(inner))
    if value < -1e-6:
        raise SignificantlyNegativeEigenvalue(f"fid {value:.3e} below numerical floor")
    return max(value, 0.0)


def pooled_feature_vector(img: ImageTensor, fx: FeatureExtractorSpec,
                          weights: dict, tap: int = -1) -> np.ndarray:
    """One feature vector per image: spatial mean of the chosen tap
    (default: deepest)."""
    maps = extract_features(img, fx, weights)
    return maps[tap].mean(axis=(1, 2))


def fid_between_sets(images_a, images_b, fx: FeatureExtractorSpec,
                     weights: dict, tap: int = -1) -> float:
    va = np.stack([pooled_feature_vector(im, fx, weights, tap) for im in images_a])
    vb = np.stack([pooled_feature_vector(im, fx, weights, tap) for im in images_b])
    return fid(gaussian_stats(va), gaussian_stats(vb))
