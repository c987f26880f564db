"""Deep feature extraction for the perceptual metrics.

The extractor is a VGG-style stack: per stage, 3x3 convs with ReLU, a tap
after the stage's last activation, then a 2x2 max pool.  Feature map index
0 is always the raw input image.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import WeightMismatch
from ..image import ImageTensor
from ..net import NetworkSpec, Node, forward, validate_weights

DEFAULT_STAGES = (16, 32, 64, 128, 128)


@dataclass
class FeatureExtractorSpec:
    net: NetworkSpec
    taps: list        # node names, one per stage
    tap_channels: list  # channel count per tap, tap 0 (raw image) excluded

    @property
    def n_maps(self) -> int:
        """Total feature maps per image including the raw-image tap."""
        return len(self.taps) + 1


def build_extractor(in_channels: int = 3,
                    stage_channels: tuple = DEFAULT_STAGES,
                    convs_per_stage: int = 1) -> FeatureExtractorSpec:
    nodes = []
    taps = []
    prev = "input"
    ch = in_channels
    for s, out_ch in enumerate(stage_channels):
        for k in range(convs_per_stage):
            name = f"s{s + 1}c{k + 1}"
            nodes.append(Node(name, "conv2d", [prev],
                              {"f": 3, "in_channels": ch, "out_channels": out_ch,
                               "stride": 1, "padding": 1}))
            nodes.append(Node(f"{name}r", "relu", [name]))
            prev = f"{name}r"
            ch = out_ch
        taps.append(prev)
        if s + 1 < len(stage_channels):
            nodes.append(Node(f"pool{s + 1}", "maxpool2", [prev]))
            prev = f"pool{s + 1}"
    spec = NetworkSpec(nodes, list(taps), input_channels=in_channels)
    spec.validate()
    return FeatureExtractorSpec(spec, list(taps), list(stage_channels))


def random_extractor_weights(fx: FeatureExtractorSpec, seed: int = 0) -> dict:
    """Seeded He-initialized conv weights for the extractor."""
    rng = np.random.default_rng(seed)
    store: dict = {}
    for node in fx.net.nodes:
        if node.op_kind != "conv2d":
            continue
        p = node.params
        fan_in = p["in_channels"] * p["f"] ** 2
        std = math.sqrt(2.0 / fan_in)
        store[f"{node.name}.weight"] = rng.normal(
            0.0, std, (p["out_channels"], p["in_channels"], p["f"], p["f"]))
        store[f"{node.name}.bias"] = np.zeros(p["out_channels"])
    return store


def random_extractor(seed: int = 0, in_channels: int = 3,
                     stage_channels: tuple = DEFAULT_STAGES):
    fx = build_extractor(in_channels, stage_channels)
    return fx, random_extractor_weights(fx, seed)


def extract_features(img: ImageTensor, fx: FeatureExtractorSpec,
                     weights: dict) -> list:
    """Feature maps [raw image, tap1, tap2, ...] in declared tap order."""
    if fx.net.input_channels is not None and img.channels != fx.net.input_channels:
        raise WeightMismatch(
            f"extractor expects {fx.net.input_channels} channels, image has {img.channels}")
    try:
        validate_weights(fx.net, weights)
    except Exception as exc:
        raise WeightMismatch(str(exc)) from exc
    outputs = forward(fx.net, weights, img.data)
    return [img.data.copy()] + list(outputs)
