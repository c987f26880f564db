"""Named network topologies: graph JSON documents plus checkpoint tensor maps.

Source tensor names follow framework conventions (module path + torch-style
parameter suffix); targets use the engine's naming scheme.  Every topology
yields (graph_doc, [(source_name, target_name, expected_shape), ...]).
"""

from __future__ import annotations


class UnknownTopology(Exception):
    pass


# torch parameter suffix -> engine parameter suffix, per op kind
_RENAME = {
    "conv2d": (("weight", "weight"), ("bias", "bias")),
    "dense": (("weight", "weight"), ("bias", "bias")),
    "prelu": (("weight", "slope"),),
    "batchnorm_inference": (
        ("weight", "gamma"), ("bias", "beta"),
        ("running_mean", "mean"), ("running_var", "var"),
    ),
}

VGG16_STAGES = (64, 128, 256, 512, 512)
VGG16_CONVS_PER_STAGE = (2, 2, 3, 3, 3)
# torchvision `features` indices of the conv layers, stage by stage
VGG16_FEATURE_INDICES = ((0, 2), (5, 7), (10, 12, 14), (17, 19, 21), (24, 26, 28))

EXTRACTOR_STAGES = (16, 32, 64, 128, 128)


def _node(name, op_kind, inputs, **params):
    return {"name": name, "op_kind": op_kind, "inputs": list(inputs), "params": params}


def _tensor_entries(node, channel_in, source_prefix=None):
    """Expected (source, target, shape) rows for one node's parameters."""
    op = node["op_kind"]
    if op not in _RENAME:
        return []
    prefix = source_prefix if source_prefix is not None else node["name"]
    rows = []
    p = node["params"]
    for src_suffix, dst_suffix in _RENAME[op]:
        if op == "conv2d":
            shape = ((p["out_channels"], p["in_channels"], p["f"], p["f"])
                     if dst_suffix == "weight" else (p["out_channels"],))
        elif op == "dense":
            shape = ((p["features_out"], p["features_in"])
                     if dst_suffix == "weight" else (p["features_out"],))
        else:
            shape = (channel_in,)
        rows.append((f"{prefix}.{src_suffix}", f"{node['name']}.{dst_suffix}", shape))
    return rows


def extractor_graph(stage_channels, convs_per_stage, in_channels=3,
                    source_names=None):
    """VGG-style feature extractor: per stage conv3x3+relu blocks, a tap
    after the last relu, maxpool2 between stages."""
    nodes = []
    rows = []
    taps = []
    prev = "input"
    ch = in_channels
    flat_idx = 0
    for s, (out_ch, n_convs) in enumerate(zip(stage_channels, convs_per_stage)):
        for k in range(n_convs):
            name = f"s{s + 1}c{k + 1}"
            node = _node(name, "conv2d", [prev], f=3, in_channels=ch,
                         out_channels=out_ch, stride=1, padding=1)
            nodes.append(node)
            src = source_names[flat_idx] if source_names else None
            rows.extend(_tensor_entries(node, out_ch, src))
            flat_idx += 1
            nodes.append(_node(f"{name}r", "relu", [name]))
            prev = f"{name}r"
            ch = out_ch
        taps.append(prev)
        if s + 1 < len(stage_channels):
            nodes.append(_node(f"pool{s + 1}", "maxpool2", [prev]))
            prev = f"pool{s + 1}"
    doc = {"input_channels": in_channels, "nodes": nodes, "outputs": taps}
    return doc, rows


def vgg16_feature_extractor():
    source_names = [f"features.{idx}"
                    for stage in VGG16_FEATURE_INDICES for idx in stage]
    return extractor_graph(VGG16_STAGES, VGG16_CONVS_PER_STAGE, 3, source_names)


def espcn(r=4, in_channels=1, activation="tanh"):
    nodes = [
        _node("conv1", "conv2d", ["input"], f=5, in_channels=in_channels,
              out_channels=64, stride=1, padding=2),
        _node("act1", activation, ["conv1"]),
        _node("conv2", "conv2d", ["act1"], f=3, in_channels=64,
              out_channels=32, stride=1, padding=1),
        _node("act2", activation, ["conv2"]),
        _node("conv3", "conv2d", ["act2"], f=3, in_channels=32,
              out_channels=in_channels * r * r, stride=1, padding=1),
        _node("shuffle", "pixel_shuffle", ["conv3"], r=r),
    ]
    rows = []
    for node in nodes:
        rows.extend(_tensor_entries(node, None))
    doc = {"input_channels": in_channels, "nodes": nodes, "outputs": ["shuffle"]}
    return doc, rows


def srgan_generator(residual_blocks=16, r=4, in_channels=3):
    if r not in (2, 4):
        raise UnknownTopology(f"generator factor must be 2 or 4, got {r}")
    n = 64
    nodes = [
        _node("head", "conv2d", ["input"], f=9, in_channels=in_channels,
              out_channels=n, stride=1, padding=4),
        _node("head_act", "prelu", ["head"]),
    ]
    rows = _tensor_entries(nodes[0], n) + _tensor_entries(nodes[1], n)
    prev = "head_act"
    for i in range(residual_blocks):
        b = f"block{i}"
        entry = prev
        block_nodes = [
            _node(f"{b}.conv1", "conv2d", [entry], f=3, in_channels=n,
                  out_channels=n, stride=1, padding=1),
            _node(f"{b}.bn1", "batchnorm_inference", [f"{b}.conv1"]),
            _node(f"{b}.act", "prelu", [f"{b}.bn1"]),
            _node(f"{b}.conv2", "conv2d", [f"{b}.act"], f=3, in_channels=n,
                  out_channels=n, stride=1, padding=1),
            _node(f"{b}.bn2", "batchnorm_inference", [f"{b}.conv2"]),
            _node(f"{b}.add", "add", [f"{b}.bn2", entry]),
        ]
        nodes.extend(block_nodes)
        for node in block_nodes:
            rows.extend(_tensor_entries(node, n))
        prev = f"{b}.add"
    tail_nodes = [
        _node("post", "conv2d", [prev], f=3, in_channels=n, out_channels=n,
              stride=1, padding=1),
        _node("post_bn", "batchnorm_inference", ["post"]),
        _node("global_add", "add", ["post_bn", "head_act"]),
    ]
    nodes.extend(tail_nodes)
    for node in tail_nodes:
        rows.extend(_tensor_entries(node, n))
    prev = "global_add"
    stages = {2: 1, 4: 2}[r]
    for s in range(stages):
        u = f"up{s}"
        up_nodes = [
            _node(f"{u}.conv", "conv2d", [prev], f=3, in_channels=n,
                  out_channels=n * 4, stride=1, padding=1),
            _node(f"{u}.shuffle", "pixel_shuffle", [f"{u}.conv"], r=2),
            _node(f"{u}.act", "prelu", [f"{u}.shuffle"]),
        ]
        nodes.extend(up_nodes)
        rows.extend(_tensor_entries(up_nodes[0], n * 4))
        rows.extend(_tensor_entries(up_nodes[2], n))
        prev = f"{u}.act"
    final = _node("tail", "conv2d", [prev], f=9, in_channels=n,
                  out_channels=in_channels, stride=1, padding=4)
    nodes.append(final)
    rows.extend(_tensor_entries(final, in_channels))
    doc = {"input_channels": in_channels, "nodes": nodes, "outputs": ["tail"]}
    return doc, rows


DISCRIMINATOR_CHANNELS = (64, 64, 128, 128, 256, 256, 512, 512)


def srgan_discriminator(in_channels=3, input_size=96):
    nodes = []
    rows = []
    prev = "input"
    ch = in_channels
    size = input_size
    for i, out_ch in enumerate(DISCRIMINATOR_CHANNELS):
        stride = 2 if i % 2 == 1 else 1
        name = f"conv{i + 1}"
        node = _node(name, "conv2d", [prev], f=3, in_channels=ch,
                     out_channels=out_ch, stride=stride, padding=1)
        nodes.append(node)
        rows.extend(_tensor_entries(node, out_ch))
        prev = name
        if i > 0:
            bn = _node(f"bn{i + 1}", "batchnorm_inference", [prev])
            nodes.append(bn)
            rows.extend(_tensor_entries(bn, out_ch))
            prev = f"bn{i + 1}"
        nodes.append(_node(f"lrelu{i + 1}", "leaky_relu", [prev], alpha=0.2))
        prev = f"lrelu{i + 1}"
        ch = out_ch
        if stride == 2:
            size = (size + 2 - 3) // 2 + 1
    feat = DISCRIMINATOR_CHANNELS[-1] * size * size
    fc1 = _node("fc1", "dense", [prev], features_in=feat, features_out=1024)
    fc2 = _node("fc2", "dense", ["fc1_act"], features_in=1024, features_out=1)
    nodes += [fc1, _node("fc1_act", "leaky_relu", ["fc1"], alpha=0.2),
              fc2, _node("prob", "sigmoid", ["fc2"])]
    rows.extend(_tensor_entries(fc1, None))
    rows.extend(_tensor_entries(fc2, None))
    doc = {"input_channels": in_channels, "nodes": nodes, "outputs": ["prob"]}
    return doc, rows


TOPOLOGIES = {
    "vgg16": vgg16_feature_extractor,
    "espcn": espcn,
    "srgan_generator": srgan_generator,
    "srgan_discriminator": srgan_discriminator,
}


def build_topology(name: str, **kwargs):
    if name not in TOPOLOGIES:
        raise UnknownTopology(
            f"unknown topology {name!r}; choose from {sorted(TOPOLOGIES)}")
    return TOPOLOGIES[name](**kwargs)
