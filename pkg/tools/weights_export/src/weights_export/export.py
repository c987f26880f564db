"""Checkpoint conversion and the seeded random extractor."""

from __future__ import annotations

import json
import math
import zlib
from pathlib import Path

import numpy as np

from .nnwb import write_container
from .topologies import EXTRACTOR_STAGES, build_topology, extractor_graph


class MissingTensor(Exception):
    pass


class ShapeMismatch(Exception):
    pass


def load_checkpoint(path) -> dict:
    """Read a checkpoint as {name: float ndarray}; .npz natively, .pt/.pth
    through torch when it is installed."""
    path = Path(path)
    if path.suffix == ".npz":
        with np.load(path) as archive:
            return {name: np.asarray(archive[name]) for name in archive.files}
    if path.suffix in (".pt", ".pth"):
        import torch

        state = torch.load(path, map_location="cpu", weights_only=True)
        if hasattr(state, "state_dict"):
            state = state.state_dict()
        return {name: tensor.detach().cpu().numpy()
                for name, tensor in state.items()}
    raise MissingTensor(f"unsupported checkpoint container {path.suffix!r}")


def _manifest(tensors: dict, topology: str) -> dict:
    return {
        "topology": topology,
        "tensor_count": len(tensors),
        "tensors": [
            {
                "name": name,
                "shape": list(arr.shape),
                "crc32": zlib.crc32(np.ascontiguousarray(arr, dtype="<f4").tobytes()),
            }
            for name, arr in tensors.items()
        ],
    }


def _write_bundle(out_stem, graph_doc: dict, tensors: dict, topology: str) -> None:
    out_stem = Path(out_stem)
    out_stem.parent.mkdir(parents=True, exist_ok=True)
    out_stem.with_suffix(".json").write_text(
        json.dumps(graph_doc, indent=2, sort_keys=True) + "\n")
    out_stem.with_suffix(".nnwb").write_bytes(write_container(tensors))
    out_stem.with_suffix(".manifest.json").write_text(
        json.dumps(_manifest(tensors, topology), indent=2, sort_keys=True) + "\n")


def export_checkpoint(checkpoint_path, topology: str, out_stem, **topology_kwargs):
    """Rename and re-serialize a checkpoint to <stem>.nnwb + <stem>.json,
    with a <stem>.manifest.json listing shapes and checksums."""
    graph_doc, rows = build_topology(topology, **topology_kwargs)
    state = load_checkpoint(checkpoint_path)
    tensors: dict = {}
    for source, target, expected_shape in rows:
        if source not in state:
            raise MissingTensor(f"checkpoint is missing tensor {source!r}")
        arr = np.asarray(state[source], dtype=np.float64)
        if expected_shape is not None and tuple(arr.shape) != tuple(expected_shape):
            raise ShapeMismatch(
                f"{source}: shape {tuple(arr.shape)}, topology expects {tuple(expected_shape)}")
        tensors[target] = arr
    _write_bundle(out_stem, graph_doc, tensors, topology)
    return tensors


def export_random_extractor(seed: int, out_stem, in_channels: int = 3,
                            stage_channels: tuple = EXTRACTOR_STAGES):
    """Seeded He-initialized weights for the 5-stage feature extractor;
    byte-identical output for a given seed."""
    graph_doc, _ = extractor_graph(stage_channels, (1,) * len(stage_channels),
                                   in_channels)
    rng = np.random.default_rng(seed)
    tensors: dict = {}
    for node in graph_doc["nodes"]:
        if node["op_kind"] != "conv2d":
            continue
        p = node["params"]
        fan_in = p["in_channels"] * p["f"] ** 2
        std = math.sqrt(2.0 / fan_in)
        tensors[f"{node['name']}.weight"] = rng.normal(
            0.0, std, (p["out_channels"], p["in_channels"], p["f"], p["f"]))
        tensors[f"{node['name']}.bias"] = np.zeros(p["out_channels"])
    _write_bundle(out_stem, graph_doc, tensors, "random_extractor")
    return tensors
