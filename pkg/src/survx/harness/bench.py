"""Wall-clock latency measurement for upscaling models."""

from __future__ import annotations

import time

import numpy as np

from ..errors import BenchConfigError
from ..image import ImageTensor

WARMUP_RUNS = 2


def make_bench_input(height: int, width: int, channels: int = 1,
                     seed: int = 0) -> ImageTensor:
    rng = np.random.default_rng(seed)
    return ImageTensor(rng.random((channels, height, width)))


def latency_bench(models: dict, img: ImageTensor, repetitions: int = 20) -> dict:
    """Median and IQR of end-to-end upscale seconds per model on one shared
    input.  models maps name -> callable(ImageTensor) -> ImageTensor."""
    if repetitions < 5:
        raise BenchConfigError(f"need >= 5 repetitions, got {repetitions}")
    results: dict = {}
    for name, run in models.items():
        for _ in range(WARMUP_RUNS):
            run(img)
        times = []
        for _ in range(repetitions):
            t0 = time.perf_counter()
            run(img)
            times.append(time.perf_counter() - t0)
        q1, median, q3 = np.percentile(times, [25.0, 50.0, 75.0])
        results[name] = {
            "median_s": float(median),
            "iqr_s": float(q3 - q1),
            "times_s": [float(t) for t in times],
        }
    return results
