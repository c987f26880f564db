"""Super-resolution network builders, patch extraction, training, upscaling.

The sub-pixel CNN uses the fixed 3-layer layout (5,64) -> (3,32) -> (3, c*r*r)
followed by a pixel shuffle; the GAN generator/discriminator graphs are built
for inference and latency benchmarking only.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DivergedLoss,
    EmptyDataset,
    UnsupportedFactor,
    WeightMismatch,
)
from .image import ImageTensor, rgb_to_ycbcr, ycbcr_to_rgb
from .net import NetworkSpec, Node, backward, forward, load_weights, save_weights, validate_weights
from .resample import crop_to_multiple, resize_array, resize_to


class ImageTooSmallWarning(UserWarning):
    """Image cannot hold a single training patch."""


# --- sub-pixel CNN -----------------------------------------------------------

ESPCN_LAYERS = ((5, 64), (3, 32))   # (kernel, feature maps) for the two hidden convs
ESPCN_F3 = 3


@dataclass(frozen=True)
class EspcnConfig:
    r: int = 4
    input_mode: str = "luma"        # "luma" or "rgb"
    activation: str = "tanh"        # hidden activation; "relu" also supported

    def __post_init__(self):
        if self.r < 1:
            raise UnsupportedFactor(f"r must be >= 1, got {self.r}")
        if self.input_mode not in ("luma", "rgb"):
            raise WeightMismatch(f"input_mode {self.input_mode!r}")
        if self.activation not in ("tanh", "relu"):
            raise WeightMismatch(f"activation {self.activation!r}")

    @property
    def channels(self) -> int:
        return 1 if self.input_mode == "luma" else 3


def build_espcn(cfg: EspcnConfig) -> NetworkSpec:
    c = cfg.channels
    (f1, n1), (f2, n2) = ESPCN_LAYERS
    nodes = [
        Node("conv1", "conv2d", ["input"],
             {"f": f1, "in_channels": c, "out_channels": n1, "stride": 1, "padding": f1 // 2}),
        Node("act1", cfg.activation, ["conv1"]),
        Node("conv2", "conv2d", ["act1"],
             {"f": f2, "in_channels": n1, "out_channels": n2, "stride": 1, "padding": f2 // 2}),
        Node("act2", cfg.activation, ["conv2"]),
        Node("conv3", "conv2d", ["act2"],
             {"f": ESPCN_F3, "in_channels": n2, "out_channels": c * cfg.r ** 2,
              "stride": 1, "padding": ESPCN_F3 // 2}),
        Node("shuffle", "pixel_shuffle", ["conv3"], {"r": cfg.r}),
    ]
    spec = NetworkSpec(nodes, ["shuffle"], input_channels=c)
    spec.validate()
    return spec


def init_espcn_weights(spec: NetworkSpec, seed: int = 0) -> dict:
    """Seeded fan-in scaled Gaussian init for a fresh trainable net."""
    rng = np.random.default_rng(seed)
    store: dict = {}
    for node in spec.nodes:
        if node.op_kind != "conv2d":
            continue
        p = node.params
        fan_in = p["in_channels"] * p["f"] ** 2
        std = math.sqrt(1.0 / fan_in)
        store[f"{node.name}.weight"] = rng.normal(
            0.0, std, (p["out_channels"], p["in_channels"], p["f"], p["f"]))
        store[f"{node.name}.bias"] = np.zeros(p["out_channels"])
    return store


# --- GAN graphs --------------------------------------------------------------

def build_srgan_generator(residual_blocks: int = 16, r: int = 4,
                          channels: int = 3) -> NetworkSpec:
    """ResNet generator: head conv+PReLU, B residual blocks, global skip,
    log2(r) sub-pixel upsampling stages, final conv."""
    if r not in (2, 4):
        raise UnsupportedFactor(f"generator upscale factor must be 2 or 4, got {r}")
    n = 64
    nodes = [
        Node("head", "conv2d", ["input"],
             {"f": 9, "in_channels": channels, "out_channels": n, "stride": 1, "padding": 4}),
        Node("head_act", "prelu", ["head"]),
    ]
    prev = "head_act"
    for i in range(residual_blocks):
        b = f"block{i}"
        entry = prev
        nodes += [
            Node(f"{b}.conv1", "conv2d", [entry],
                 {"f": 3, "in_channels": n, "out_channels": n, "stride": 1, "padding": 1}),
            Node(f"{b}.bn1", "batchnorm_inference", [f"{b}.conv1"]),
            Node(f"{b}.act", "prelu", [f"{b}.bn1"]),
            Node(f"{b}.conv2", "conv2d", [f"{b}.act"],
                 {"f": 3, "in_channels": n, "out_channels": n, "stride": 1, "padding": 1}),
            Node(f"{b}.bn2", "batchnorm_inference", [f"{b}.conv2"]),
            Node(f"{b}.add", "add", [f"{b}.bn2", entry]),
        ]
        prev = f"{b}.add"
    nodes += [
        Node("post", "conv2d", [prev],
             {"f": 3, "in_channels": n, "out_channels": n, "stride": 1, "padding": 1}),
        Node("post_bn", "batchnorm_inference", ["post"]),
        Node("global_add", "add", ["post_bn", "head_act"]),
    ]
    prev = "global_add"
    for s in range(int(math.log2(r))):
        u = f"up{s}"
        nodes += [
            Node(f"{u}.conv", "conv2d", [prev],
                 {"f": 3, "in_channels": n, "out_channels": n * 4, "stride": 1, "padding": 1}),
            Node(f"{u}.shuffle", "pixel_shuffle", [f"{u}.conv"], {"r": 2}),
            Node(f"{u}.act", "prelu", [f"{u}.shuffle"]),
        ]
        prev = f"{u}.act"
    nodes.append(Node("tail", "conv2d", [prev],
                      {"f": 9, "in_channels": n, "out_channels": channels,
                       "stride": 1, "padding": 4}))
    spec = NetworkSpec(nodes, ["tail"], input_channels=channels)
    spec.validate()
    return spec


DISCRIMINATOR_CHANNELS = (64, 64, 128, 128, 256, 256, 512, 512)


def build_srgan_discriminator(channels: int = 3, input_size: int = 96) -> NetworkSpec:
    """Eight 3x3 conv layers from 64 to 512 maps, stride 2 on every second
    layer, LeakyReLU(0.2) throughout, two dense layers, sigmoid output."""
    nodes = []
    prev = "input"
    in_ch = channels
    size = input_size
    for i, out_ch in enumerate(DISCRIMINATOR_CHANNELS):
        stride = 2 if i % 2 == 1 else 1
        name = f"conv{i + 1}"
        nodes.append(Node(name, "conv2d", [prev],
                          {"f": 3, "in_channels": in_ch, "out_channels": out_ch,
                           "stride": stride, "padding": 1}))
        prev = name
        if i > 0:
            nodes.append(Node(f"bn{i + 1}", "batchnorm_inference", [prev]))
            prev = f"bn{i + 1}"
        nodes.append(Node(f"lrelu{i + 1}", "leaky_relu", [prev], {"alpha": 0.2}))
        prev = f"lrelu{i + 1}"
        in_ch = out_ch
        if stride == 2:
            size = (size + 2 - 3) // 2 + 1
    feat = DISCRIMINATOR_CHANNELS[-1] * size * size
    nodes += [
        Node("fc1", "dense", [prev], {"features_in": feat, "features_out": 1024}),
        Node("fc1_act", "leaky_relu", ["fc1"], {"alpha": 0.2}),
        Node("fc2", "dense", ["fc1_act"], {"features_in": 1024, "features_out": 1}),
        Node("prob", "sigmoid", ["fc2"]),
    ]
    spec = NetworkSpec(nodes, ["prob"], input_channels=channels)
    spec.validate()
    return spec


def random_inference_weights(spec: NetworkSpec, seed: int = 0) -> dict:
    """Seeded He-style weights for every parameter the graph needs; batch
    norms come out as identity-with-jitter so activations stay bounded."""
    rng = np.random.default_rng(seed)
    store: dict = {}
    for node in spec.nodes:
        p = node.params
        if node.op_kind == "conv2d":
            fan_in = p["in_channels"] * p["f"] ** 2
            std = math.sqrt(2.0 / fan_in)
            store[f"{node.name}.weight"] = rng.normal(
                0.0, std, (p["out_channels"], p["in_channels"], p["f"], p["f"]))
            store[f"{node.name}.bias"] = np.zeros(p["out_channels"])
        elif node.op_kind == "prelu":
            ch = _prelu_channels(spec, node)
            store[f"{node.name}.slope"] = np.full(ch, 0.25)
        elif node.op_kind == "batchnorm_inference":
            ch = _prelu_channels(spec, node)
            store[f"{node.name}.gamma"] = np.ones(ch)
            store[f"{node.name}.beta"] = np.zeros(ch)
            store[f"{node.name}.mean"] = rng.normal(0.0, 0.01, ch)
            store[f"{node.name}.var"] = np.ones(ch)
        elif node.op_kind == "dense":
            std = math.sqrt(2.0 / p["features_in"])
            store[f"{node.name}.weight"] = rng.normal(
                0.0, std, (p["features_out"], p["features_in"]))
            store[f"{node.name}.bias"] = np.zeros(p["features_out"])
    return store


def _prelu_channels(spec: NetworkSpec, node: Node) -> int:
    """Channel count reaching a per-channel parameter node."""
    name = node.inputs[0]
    while True:
        src = spec.node(name)
        if src.op_kind == "conv2d":
            return src.params["out_channels"]
        if src.op_kind == "dense":
            return src.params["features_out"]
        if src.op_kind == "pixel_shuffle":
            up = spec.node(src.inputs[0])
            return up.params["out_channels"] // src.params["r"] ** 2
        name = src.inputs[0]


# --- training patches --------------------------------------------------------

PATCH_LR = 17


def patch_strides(f: tuple[int, ...], r: int) -> tuple[int, int]:
    """(LR stride, HR stride): 17 - sum(f mod 2), scaled by r on the HR side."""
    lr = PATCH_LR - sum(k % 2 for k in f)
    return lr, lr * r


def extract_training_patches(hr: ImageTensor, r: int,
                             f: tuple[int, ...] = (5, 3, 3)):
    """Aligned (lr 17x17, hr 17r x 17r) patch pairs from one ground-truth image."""
    if hr.height < PATCH_LR * r or hr.width < PATCH_LR * r:
        warnings.warn(
            f"image {hr.height}x{hr.width} smaller than one {PATCH_LR * r}px patch",
            ImageTooSmallWarning, stacklevel=2)
        return []
    hr = crop_to_multiple(hr, r)
    lr = resize_to(hr, hr.height // r, hr.width // r, antialias=True)
    stride_lr, _ = patch_strides(f, r)
    pairs = []
    for y in range(0, lr.height - PATCH_LR + 1, stride_lr):
        for x in range(0, lr.width - PATCH_LR + 1, stride_lr):
            lr_patch = ImageTensor(lr.data[:, y:y + PATCH_LR, x:x + PATCH_LR])
            hy, hx = y * r, x * r
            hr_patch = ImageTensor(
                hr.data[:, hy:hy + PATCH_LR * r, hx:hx + PATCH_LR * r])
            pairs.append((lr_patch, hr_patch))
    return pairs


# --- trainer -----------------------------------------------------------------

@dataclass
class TrainConfig:
    lr_initial: float = 0.01
    lr_final: float = 0.0001
    improvement_threshold_mu: float = 1e-4   # relative per-epoch improvement
    patience_epochs: int = 100
    batch_size: int = 16
    seed: int = 0
    max_epochs: int = 500
    lr_decay: float = 0.1
    optimizer: str = "sgd"                   # "sgd" or "adam"
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999

    def __post_init__(self):
        if self.lr_final > self.lr_initial:
            raise WeightMismatch("lr_final must not exceed lr_initial")
        if self.patience_epochs < 1:
            raise WeightMismatch("patience must be >= 1")


@dataclass
class EpochLog:
    epoch: int
    loss: float
    learning_rate: float


def _loss_and_grads(spec, weights, batch):
    """Mean-squared-error over the batch plus parameter gradients."""
    total = 0.0
    grads: dict = {}
    for lr_patch, hr_patch in batch:
        (out,), tape = forward(spec, weights, lr_patch, record_tape=True)
        diff = out - hr_patch
        total += float(np.mean(diff ** 2))
        g = (2.0 / diff.size) * diff
        pg, _ = backward(tape, g)
        for k, v in pg.items():
            grads[k] = grads.get(k, 0.0) + v
    n = len(batch)
    return total / n, {k: v / n for k, v in grads.items()}


def train_espcn(patches, train_cfg: TrainConfig, espcn_cfg: EspcnConfig):
    """Gradient-descent MSE training of the sub-pixel CNN.

    Returns (weights, [EpochLog...]).  The learning rate decays toward
    lr_final whenever the relative epoch improvement falls under mu; training
    stops when the best loss has not improved for patience_epochs.
    """
    if not patches:
        raise EmptyDataset("no training patches")
    spec = build_espcn(espcn_cfg)
    weights = init_espcn_weights(spec, train_cfg.seed)
    data = [(p[0].data if isinstance(p[0], ImageTensor) else np.asarray(p[0]),
             p[1].data if isinstance(p[1], ImageTensor) else np.asarray(p[1]))
            for p in patches]

    lr = train_cfg.lr_initial
    log: list[EpochLog] = []
    best = math.inf
    since_best = 0
    prev_loss = None
    adam_m: dict = {}
    adam_v: dict = {}
    step = 0

    for epoch in range(train_cfg.max_epochs):
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, len(data), train_cfg.batch_size):
            batch = data[start:start + train_cfg.batch_size]
            loss, grads = _loss_and_grads(spec, weights, batch)
            epoch_loss += loss * len(batch)
            n_batches += 1
            step += 1
            if train_cfg.optimizer == "adam":
                b1, b2 = train_cfg.adam_beta1, train_cfg.adam_beta2
                for k, g in grads.items():
                    adam_m[k] = b1 * adam_m.get(k, 0.0) + (1 - b1) * g
                    adam_v[k] = b2 * adam_v.get(k, 0.0) + (1 - b2) * g * g
                    mhat = adam_m[k] / (1 - b1 ** step)
                    vhat = adam_v[k] / (1 - b2 ** step)
                    weights[k] = weights[k] - lr * mhat / (np.sqrt(vhat) + 1e-8)
            else:
                for k, g in grads.items():
                    weights[k] = weights[k] - lr * g
        epoch_loss /= len(data)
        if not math.isfinite(epoch_loss):
            raise DivergedLoss(f"epoch {epoch}: loss {epoch_loss}")
        log.append(EpochLog(epoch, epoch_loss, lr))

        if epoch_loss < best:
            best = epoch_loss
            since_best = 0
        else:
            since_best += 1
            if since_best >= train_cfg.patience_epochs:
                break
        if prev_loss is not None:
            improvement = (prev_loss - epoch_loss) / max(prev_loss, 1e-300)
            if improvement < train_cfg.improvement_threshold_mu:
                lr = max(lr * train_cfg.lr_decay, train_cfg.lr_final)
        prev_loss = epoch_loss
    return weights, log


# --- end-to-end upscale ------------------------------------------------------

def _run_net(spec, weights, data: np.ndarray) -> np.ndarray:
    (out,) = forward(spec, weights, data)
    return out


def upscale(img: ImageTensor, spec: NetworkSpec, weights: dict, r: int,
            input_mode: str = "luma") -> ImageTensor:
    """Upscale by r with the given network; luma mode runs the net on Y and
    upscales chroma bicubically.  Output is clamped to [0, 1]."""
    try:
        validate_weights(spec, weights)
    except Exception as exc:
        raise WeightMismatch(str(exc)) from exc
    out_h, out_w = img.height * r, img.width * r
    if input_mode == "rgb":
        if img.channels != 3:
            raise WeightMismatch("rgb mode needs a 3-channel image")
        sr = _run_net(spec, weights, img.data)
    elif img.channels == 1:
        sr = _run_net(spec, weights, img.data)
    else:
        ycbcr = rgb_to_ycbcr(img)
        sr_y = _run_net(spec, weights, ycbcr[0:1])
        if sr_y.shape != (1, out_h, out_w):
            raise WeightMismatch(
                f"network produced {sr_y.shape}, expected {(1, out_h, out_w)}")
        chroma_up = resize_array(ycbcr[1:3], out_h, out_w, antialias=False)
        full = np.stack([np.clip(sr_y[0], 0.0, 1.0), chroma_up[0], chroma_up[1]])
        return ycbcr_to_rgb(full)
    if sr.shape[-2:] != (out_h, out_w):
        raise WeightMismatch(
            f"network produced {sr.shape[-2:]}, expected {(out_h, out_w)}")
    return ImageTensor(np.clip(sr, 0.0, 1.0))


def bicubic_upscale(img: ImageTensor, r: int) -> ImageTensor:
    return resize_to(img, img.height * r, img.width * r, antialias=False)


# --- model bundles -----------------------------------------------------------

@dataclass
class ModelBundle:
    spec: NetworkSpec
    weights: dict
    r: int
    input_mode: str


def save_bundle(stem, spec: NetworkSpec, weights: dict, r: int,
                input_mode: str = "luma") -> None:
    """Write <stem>.json (graph + metadata) and <stem>.nnwb (weights)."""
    stem = Path(stem)
    doc = json.loads(spec.to_json())
    doc["metadata"] = {"r": r, "input_mode": input_mode}
    stem.with_suffix(".json").write_text(json.dumps(doc, indent=2, sort_keys=True))
    stem.with_suffix(".nnwb").write_bytes(save_weights(weights))


def load_bundle(stem) -> ModelBundle:
    stem = Path(stem)
    if stem.suffix in (".json", ".nnwb"):
        stem = stem.with_suffix("")
    doc = json.loads(stem.with_suffix(".json").read_text())
    meta = doc.pop("metadata", {})
    spec = NetworkSpec.from_json(json.dumps(doc))
    weights = load_weights(stem.with_suffix(".nnwb").read_bytes())
    validate_weights(spec, weights)
    return ModelBundle(spec, weights, int(meta.get("r", 4)),
                       meta.get("input_mode", "luma"))
