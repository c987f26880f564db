"""Feature-space similarity scores reported as 1 - distance.

lpips_score: channel-unit-normalized feature differences, scaled channel
wise, averaged spatially, summed over channels and taps.

dists_score: per feature map, a texture term on global spatial means and a
structure term on global spatial (co)variances, combined with weights that
sum to one over all maps.
"""

from __future__ import annotations

import numpy as np

from ..errors import DimMismatch, WeightNormalization, WeightShapeMismatch
from ..image import ImageTensor
from .features import FeatureExtractorSpec, extract_features

_NORM_EPS = 1e-10
DISTS_C1 = 1e-6
DISTS_C2 = 1e-6


def _check_dims(x: ImageTensor, y: ImageTensor) -> None:
    if x.data.shape != y.data.shape:
        raise DimMismatch(f"{x.data.shape} vs {y.data.shape}")


def _unit_normalize(fm: np.ndarray) -> np.ndarray:
    norm = np.sqrt((fm * fm).sum(axis=0, keepdims=True))
    return fm / (norm + _NORM_EPS)


def lpips_distance(x: ImageTensor, y: ImageTensor, fx: FeatureExtractorSpec,
                   weights: dict, channel_weights=None) -> float:
    """Sum over taps of spatially averaged, channel-weighted squared
    differences of unit-normalized features."""
    _check_dims(x, y)
    fa = extract_features(x, fx, weights)
    fb = extract_features(y, fx, weights)
    if channel_weights is None:
        channel_weights = [np.ones(f.shape[0]) for f in fa]
    if len(channel_weights) != len(fa):
        raise WeightShapeMismatch(
            f"{len(channel_weights)} weight vectors for {len(fa)} feature maps")
    dist = 0.0
    for fm_a, fm_b, w in zip(fa, fb, channel_weights):
        w = np.asarray(w, dtype=np.float64)
        if w.shape != (fm_a.shape[0],):
            raise WeightShapeMismatch(
                f"weight shape {w.shape} for {fm_a.shape[0]} channels")
        diff = _unit_normalize(fm_a) - _unit_normalize(fm_b)
        per_channel = (diff * diff).mean(axis=(1, 2))
        dist += float(per_channel @ w)
    return dist


def lpips_score(x: ImageTensor, y: ImageTensor, fx: FeatureExtractorSpec,
                weights: dict, channel_weights=None) -> float:
    return 1.0 - lpips_distance(x, y, fx, weights, channel_weights)


def uniform_dists_weights(fx: FeatureExtractorSpec, in_channels: int = 3):
    """Per-channel alpha/beta giving each feature map equal total weight
    1/(2*n_maps); the grand total sums to 1."""
    chans = [in_channels] + list(fx.tap_channels)
    n_maps = len(chans)
    alphas = [np.full(c, 1.0 / (2.0 * n_maps * c)) for c in chans]
    betas = [np.full(c, 1.0 / (2.0 * n_maps * c)) for c in chans]
    return alphas, betas


def dists_score(x: ImageTensor, y: ImageTensor, fx: FeatureExtractorSpec,
                weights: dict, alpha=None, beta=None) -> float:
    """1 - DISTS distance; texture terms on global means, structure terms on
    global correlations, per feature map including the raw image."""
    _check_dims(x, y)
    fa = extract_features(x, fx, weights)
    fb = extract_features(y, fx, weights)
    if alpha is None or beta is None:
        alpha, beta = uniform_dists_weights(fx, x.channels)
    if len(alpha) != len(fa) or len(beta) != len(fb):
        raise WeightShapeMismatch(
            f"{len(alpha)}/{len(beta)} weight vectors for {len(fa)} feature maps")
    total = 0.0
    similarity = 0.0
    for fm_a, fm_b, a_j, b_j in zip(fa, fb, alpha, beta):
        a_j = np.asarray(a_j, dtype=np.float64)
        b_j = np.asarray(b_j, dtype=np.float64)
        c = fm_a.shape[0]
        if a_j.shape != (c,) or b_j.shape != (c,):
            raise WeightShapeMismatch(f"weights for {c}-channel map have shapes "
                                      f"{a_j.shape}, {b_j.shape}")
        total += float(a_j.sum() + b_j.sum())
        mu_a = fm_a.mean(axis=(1, 2))
        mu_b = fm_b.mean(axis=(1, 2))
        var_a = fm_a.var(axis=(1, 2))
        var_b = fm_b.var(axis=(1, 2))
        cov = ((fm_a - mu_a[:, None, None]) * (fm_b - mu_b[:, None, None])).mean(axis=(1, 2))
        texture = (2 * mu_a * mu_b + DISTS_C1) / (mu_a ** 2 + mu_b ** 2 + DISTS_C1)
        structure = (2 * cov + DISTS_C2) / (var_a + var_b + DISTS_C2)
        similarity += float(a_j @ texture + b_j @ structure)
    if abs(total - 1.0) > 1e-9:
        raise WeightNormalization(f"alpha+beta sum to {total}, expected 1")
    return similarity


def dists_distance(x, y, fx, weights, alpha=None, beta=None) -> float:
    return 1.0 - dists_score(x, y, fx, weights, alpha, beta)
