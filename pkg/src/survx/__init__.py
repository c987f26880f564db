"""survx: super-resolution upscaling and perceptual quality evaluation.

Core pieces: a planar image type with PNG/PNM codecs, MATLAB-style bicubic
resampling, a small CNN engine (forward + reverse-mode gradients) running
the sub-pixel CNN and GAN inference graphs, the usual objective quality
metrics (MSE/PSNR, SSIM, LPIPS-style, DISTS, FID), and a mean-opinion-score
evaluation harness with significance testing.
"""

from .image import ImageTensor, decode_image, encode_image, load_image, rgb_to_luma, save_image
from .resample import ResampleSpec, cubic_kernel, degrade, degrade_x4, resize, resize_to

__version__ = "0.1.0"

__all__ = [
    "ImageTensor", "ResampleSpec", "cubic_kernel", "decode_image", "degrade",
    "degrade_x4", "encode_image", "load_image", "resize", "resize_to",
    "rgb_to_luma", "save_image", "__version__",
]
