"""Objective image-quality measures: MSE/PSNR, SSIM, LPIPS-style, DISTS, FID."""

from .basic import SsimParams, mse_psnr, ssim
from .features import (
    DEFAULT_STAGES,
    FeatureExtractorSpec,
    build_extractor,
    extract_features,
    random_extractor,
    random_extractor_weights,
)
from .fid import (
    GaussianStats,
    fid,
    fid_between_sets,
    gaussian_stats,
    pooled_feature_vector,
    sqrtm_psd,
)
from .perceptual import (
    dists_distance,
    dists_score,
    lpips_distance,
    lpips_score,
    uniform_dists_weights,
)

__all__ = [
    "DEFAULT_STAGES", "FeatureExtractorSpec", "GaussianStats", "SsimParams",
    "build_extractor", "dists_distance", "dists_score", "extract_features",
    "fid", "fid_between_sets", "gaussian_stats", "lpips_distance",
    "lpips_score", "mse_psnr", "pooled_feature_vector", "random_extractor",
    "random_extractor_weights", "sqrtm_psd", "ssim", "uniform_dists_weights",
]
