"""Standalone writer for the NNWB weight container.

This deliberately re-implements the documented format rather than importing
the consumer package: the binary layout is the interface.

Little-endian: magic "NNWB", version u32 = 1, tensor_count u32; per tensor
name_len u16, UTF-8 name, rank u8, dims u32 each, f32 row-major values.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"NNWB"
VERSION = 1


def write_container(tensors: dict) -> bytes:
    out = bytearray()
    out += MAGIC
    out += struct.pack("<II", VERSION, len(tensors))
    for name, tensor in tensors.items():
        arr = np.ascontiguousarray(tensor, dtype="<f4")
        name_b = name.encode("utf-8")
        out += struct.pack("<H", len(name_b))
        out += name_b
        out += struct.pack("<B", arr.ndim)
        out += struct.pack(f"<{arr.ndim}I", *arr.shape)
        out += arr.tobytes()
    return bytes(out)
