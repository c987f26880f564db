"""NNWB binary weight container.

Layout (little-endian):
    magic  "NNWB" (4 bytes)
    version u32 = 1
    tensor_count u32
    per tensor:
        name_len u16, UTF-8 name,
        rank u8, dims u32 * rank,
        values f32 row-major
"""

from __future__ import annotations

import struct

import numpy as np

from ..errors import BadMagic, DuplicateName, TruncatedTensor, VersionUnsupported

MAGIC = b"NNWB"
VERSION = 1

WeightStore = dict  # name -> float64 ndarray


def save_weights(store: dict) -> bytes:
    out = bytearray()
    out += MAGIC
    out += struct.pack("<II", VERSION, len(store))
    for name, tensor in store.items():
        arr = np.ascontiguousarray(tensor, dtype="<f4")
        name_b = name.encode("utf-8")
        out += struct.pack("<H", len(name_b))
        out += name_b
        out += struct.pack("<B", arr.ndim)
        out += struct.pack(f"<{arr.ndim}I", *arr.shape)
        out += arr.tobytes()
    return bytes(out)


def load_weights(data: bytes) -> dict:
    if data[:4] != MAGIC:
        raise BadMagic(f"expected {MAGIC!r}, got {data[:4]!r}")
    if len(data) < 12:
        raise TruncatedTensor("header truncated")
    version, count = struct.unpack_from("<II", data, 4)
    if version != VERSION:
        raise VersionUnsupported(f"container version {version}")
    pos = 12
    store: dict = {}
    for i in range(count):
        label = f"tensor #{i}"
        try:
            (name_len,) = struct.unpack_from("<H", data, pos)
            pos += 2
            if len(data) < pos + name_len:
                raise TruncatedTensor(f"{label}: name truncated")
            name = data[pos:pos + name_len].decode("utf-8")
            pos += name_len
            label = name
            (rank,) = struct.unpack_from("<B", data, pos)
            pos += 1
            dims = struct.unpack_from(f"<{rank}I", data, pos)
            pos += 4 * rank
        except (struct.error, UnicodeDecodeError) as exc:
            raise TruncatedTensor(f"{label}: header truncated") from exc
        n_values = int(np.prod(dims, dtype=np.int64)) if rank else 1
        end = pos + 4 * n_values
        if end > len(data):
            raise TruncatedTensor(f"{label}: expected {n_values} f32 values")
        values = np.frombuffer(data, dtype="<f4", count=n_values, offset=pos)
        pos = end
        if name in store:
            raise DuplicateName(name)
        store[name] = values.astype(np.float64).reshape(dims)
    return store


def required_parameters(spec) -> dict:
    """Map of parameter tensor name -> expected dims (None = runtime-sized)."""
    req: dict = {}
    for node in spec.nodes:
        op = node.op_kind
        p = node.params
        if op == "conv2d":
            f = p["f"]
            req[f"{node.name}.weight"] = (p["out_channels"], p["in_channels"], f, f)
            req[f"{node.name}.bias"] = (p["out_channels"],)
        elif op == "prelu":
            req[f"{node.name}.slope"] = None  # (channels,), checked at runtime
        elif op == "batchnorm_inference":
            for part in ("gamma", "beta", "mean", "var"):
                req[f"{node.name}.{part}"] = None
        elif op == "dense":
            req[f"{node.name}.weight"] = (p["features_out"], p["features_in"])
            req[f"{node.name}.bias"] = (p["features_out"],)
    return req


def validate_weights(spec, store: dict) -> None:
    from ..errors import MissingWeight, ShapeMismatch
    for name, dims in required_parameters(spec).items():
        if name not in store:
            raise MissingWeight(name)
        if dims is not None and tuple(store[name].shape) != tuple(dims):
            raise ShapeMismatch(f"{name}: expected dims {dims}, got {tuple(store[name].shape)}")
        if not np.all(np.isfinite(store[name])):
            raise ShapeMismatch(f"{name}: non-finite values")
