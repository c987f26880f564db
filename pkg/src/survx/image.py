"""Canonical image representation, codecs, and color transforms.

Images are planar float arrays (channels, height, width) with samples in
[0, 1].  Two codecs are supported: binary PNM (P6 color / P5 gray, maxval
255) and 8-bit PNG (grayscale or truecolor, non-interlaced), both
implemented here so decode/encode are bit-reproducible.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .errors import (
    ChannelMismatch,
    MalformedFile,
    UnsupportedChannelCount,
    UnsupportedFormat,
)

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"

# Rec.601 luma coefficients.
_LUMA_R, _LUMA_G, _LUMA_B = 0.299, 0.587, 0.114


@dataclass(frozen=True)
class ImageTensor:
    """Immutable planar image: data has shape (channels, height, width).

    Samples are float64 in [0, 1]; flattening the array row-major gives the
    planar layout sample(c, y, x) = flat[c*H*W + y*W + x].
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3:
            raise ChannelMismatch(f"expected (channels, height, width), got shape {arr.shape}")
        c, h, w = arr.shape
        if c not in (1, 3):
            raise UnsupportedChannelCount(f"channels must be 1 or 3, got {c}")
        if h < 1 or w < 1:
            raise ChannelMismatch(f"degenerate image dims {h}x{w}")
        if not np.all(np.isfinite(arr)):
            raise ChannelMismatch("image samples must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ChannelMismatch("image samples must lie in [0, 1]")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    def sample(self, c: int, y: int, x: int) -> float:
        return float(self.data[c, y, x])

    def __eq__(self, other) -> bool:
        if not isinstance(other, ImageTensor):
            return NotImplemented
        return self.data.shape == other.data.shape and bool(np.array_equal(self.data, other.data))


def from_bytes_u8(arr: np.ndarray) -> ImageTensor:
    """Wrap a uint8 (c, h, w) array, mapping v -> v/255."""
    return ImageTensor(np.asarray(arr, dtype=np.float64) / 255.0)


def quantize_u8(img: ImageTensor) -> np.ndarray:
    """Samples to bytes: round(v*255) half up, clamped to [0, 255]."""
    return np.clip(np.floor(img.data * 255.0 + 0.5), 0, 255).astype(np.uint8)


# --- PNM (P5 / P6) ----------------------------------------------------------

def _read_pnm_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    n = len(buf)
    while pos < n:
        ch = buf[pos:pos + 1]
        if ch == b"#":  # comment runs to end of line
            while pos < n and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif ch.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not buf[pos:pos + 1].isspace() and buf[pos:pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise MalformedFile("truncated PNM header")
    return buf[start:pos], pos


def _decode_pnm(data: bytes) -> ImageTensor:
    magic = data[:2]
    channels = {b"P5": 1, b"P6": 3}.get(magic)
    if channels is None:
        raise MalformedFile(f"not a binary PNM file (magic {magic!r})")
    pos = 2
    fields = []
    for _ in range(3):
        tok, pos = _read_pnm_token(data, pos)
        if not tok.isdigit():
            raise MalformedFile(f"bad PNM header token {tok!r}")
        fields.append(int(tok))
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise MalformedFile(f"bad PNM dims {width}x{height}")
    if maxval != 255:
        raise UnsupportedFormat(f"only maxval 255 supported, got {maxval}")
    pos += 1  # single whitespace byte after maxval
    need = width * height * channels
    raster = data[pos:pos + need]
    if len(raster) < need:
        raise MalformedFile(f"PNM raster truncated: expected {need} bytes, got {len(raster)}")
    arr = np.frombuffer(raster, dtype=np.uint8).reshape(height, width, channels)
    return from_bytes_u8(arr.transpose(2, 0, 1))


def _encode_pnm(img: ImageTensor) -> bytes:
    u8 = quantize_u8(img)
    magic = b"P5" if img.channels == 1 else b"P6"
    header = magic + b"\n%d %d\n255\n" % (img.width, img.height)
    return header + u8.transpose(1, 2, 0).tobytes()


# --- PNG ---------------------------------------------------------------------

def _paeth(a: int, b: int, c: int) -> int:
    p = a + b - c
    pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
    if pa <= pb and pa <= pc:
        return a
    if pb <= pc:
        return b
    return c


def _unfilter_scanlines(raw: bytes, height: int, stride: int, bpp: int) -> np.ndarray:
    if len(raw) != height * (stride + 1):
        raise MalformedFile("PNG pixel data has wrong length")
    out = np.zeros((height, stride), dtype=np.uint8)
    prev = np.zeros(stride, dtype=np.int64)
    pos = 0
    for y in range(height):
        ftype = raw[pos]
        line = np.frombuffer(raw, dtype=np.uint8, count=stride, offset=pos + 1).astype(np.int64)
        pos += stride + 1
        if ftype == 0:
            cur = line
        elif ftype == 1:  # Sub
            cur = line.copy()
            for x in range(bpp, stride):
                cur[x] = (cur[x] + cur[x - bpp]) & 0xFF
        elif ftype == 2:  # Up
            cur = (line + prev) & 0xFF
        elif ftype == 3:  # Average
            cur = line.copy()
            for x in range(stride):
                left = cur[x - bpp] if x >= bpp else 0
                cur[x] = (cur[x] + (left + prev[x]) // 2) & 0xFF
        elif ftype == 4:  # Paeth
            cur = line.copy()
            for x in range(stride):
                left = cur[x - bpp] if x >= bpp else 0
                ul = prev[x - bpp] if x >= bpp else 0
                cur[x] = (cur[x] + _paeth(int(left), int(prev[x]), int(ul))) & 0xFF
        else:
            raise MalformedFile(f"unknown PNG filter type {ftype}")
        out[y] = cur.astype(np.uint8)
        prev = cur
    return out


def _parse_ihdr(body: bytes) -> tuple[int, int, int]:
    width, height, depth, color, comp, filt, interlace = struct.unpack(">IIBBBBB", body)
    if width < 1 or height < 1 or comp != 0 or filt != 0:
        raise MalformedFile("bad IHDR fields")
    if depth != 8:
        raise UnsupportedFormat(f"only 8-bit PNG supported, got depth {depth}")
    if interlace != 0:
        raise UnsupportedFormat("interlaced PNG not supported")
    if color == 0:
        channels = 1
    elif color == 2:
        channels = 3
    elif color == 3:
        raise UnsupportedFormat("palette PNG not supported")
    else:
        raise UnsupportedFormat(f"PNG color type {color} not supported")
    return width, height, channels


def _decode_png(data: bytes) -> ImageTensor:
    if data[:8] != _PNG_SIGNATURE:
        raise MalformedFile("bad PNG signature")
    pos = 8
    ihdr = None
    idat = bytearray()
    seen_iend = False
    while pos < len(data):
        if pos + 8 > len(data):
            raise MalformedFile("truncated PNG chunk header")
        length, ctype = struct.unpack(">I4s", data[pos:pos + 8])
        body = data[pos + 8:pos + 8 + length]
        if len(body) < length or pos + 12 + length > len(data):
            raise MalformedFile(f"truncated PNG chunk {ctype!r}")
        (crc,) = struct.unpack(">I", data[pos + 8 + length:pos + 12 + length])
        if zlib.crc32(ctype + body) & 0xFFFFFFFF != crc:
            raise MalformedFile(f"PNG chunk {ctype!r} CRC mismatch")
        pos += 12 + length
        if ctype == b"IHDR":
            ihdr = _parse_ihdr(body)
        elif ctype == b"IDAT":
            idat.extend(body)
        elif ctype == b"IEND":
            seen_iend = True
            break
    if ihdr is None or not seen_iend:
        raise MalformedFile("PNG missing IHDR or IEND")
    width, height, channels = ihdr
    try:
        raw = zlib.decompress(bytes(idat))
    except zlib.error as exc:
        raise MalformedFile(f"PNG zlib stream corrupt: {exc}") from exc
    stride = width * channels
    pixels = _unfilter_scanlines(raw, height, stride, channels)
    arr = pixels.reshape(height, width, channels).transpose(2, 0, 1)
    return from_bytes_u8(arr)


def _encode_png(img: ImageTensor) -> bytes:
    u8 = quantize_u8(img).transpose(1, 2, 0)
    height, width, channels = u8.shape
    color = 0 if channels == 1 else 2
    ihdr = struct.pack(">IIBBBBB", width, height, 8, color, 0, 0, 0)

    # filter type 0 on every scanline keeps the encoder deterministic
    lines = bytearray()
    for y in range(height):
        lines.append(0)
        lines.extend(u8[y].tobytes())
    idat = zlib.compress(bytes(lines), 9)

    def chunk(ctype: bytes, body: bytes) -> bytes:
        return (
            struct.pack(">I", len(body)) + ctype + body
            + struct.pack(">I", zlib.crc32(ctype + body) & 0xFFFFFFFF)
        )

    return _PNG_SIGNATURE + chunk(b"IHDR", ihdr) + chunk(b"IDAT", idat) + chunk(b"IEND", b"")


# --- public codec API --------------------------------------------------------

def decode_image(data: bytes) -> ImageTensor:
    """Decode PNG or binary PNM bytes into an ImageTensor (v/255 mapping)."""
    if len(data) < 8:
        raise MalformedFile("file too short")
    if data[:8] == _PNG_SIGNATURE:
        return _decode_png(data)
    if data[:2] in (b"P5", b"P6"):
        return _decode_pnm(data)
    raise MalformedFile(f"unrecognized image magic {data[:8]!r}")


def encode_image(img: ImageTensor, fmt: str) -> bytes:
    """Encode to 'png' or 'ppm' bytes (round(v*255), half up)."""
    if img.channels not in (1, 3):
        raise UnsupportedChannelCount(f"cannot encode {img.channels}-channel image")
    fmt = fmt.lower().lstrip(".")
    if fmt == "png":
        return _encode_png(img)
    if fmt in ("ppm", "pgm", "pnm"):
        return _encode_pnm(img)
    raise UnsupportedFormat(f"unknown format {fmt!r}")


def load_image(path) -> ImageTensor:
    with open(path, "rb") as fh:
        return decode_image(fh.read())


def save_image(path, img: ImageTensor) -> None:
    """Write the image; the file extension selects the codec."""
    ext = str(path).rsplit(".", 1)[-1].lower() if "." in str(path) else ""
    data = encode_image(img, ext)
    with open(path, "wb") as fh:
        fh.write(data)


# --- color -------------------------------------------------------------------

def rgb_to_luma(img: ImageTensor) -> ImageTensor:
    """Rec.601 luma: Y = 0.299 R + 0.587 G + 0.114 B."""
    if img.channels != 3:
        raise ChannelMismatch(f"rgb_to_luma needs 3 channels, got {img.channels}")
    r, g, b = img.data
    y = _LUMA_R * r + _LUMA_G * g + _LUMA_B * b
    return ImageTensor(np.clip(y, 0.0, 1.0)[None])


def rgb_to_ycbcr(img: ImageTensor) -> np.ndarray:
    """RGB -> (3, h, w) YCbCr array; Y in [0,1], Cb/Cr centered on 0.5."""
    if img.channels != 3:
        raise ChannelMismatch(f"rgb_to_ycbcr needs 3 channels, got {img.channels}")
    r, g, b = img.data
    y = _LUMA_R * r + _LUMA_G * g + _LUMA_B * b
    cb = 0.5 + (b - y) / 1.772
    cr = 0.5 + (r - y) / 1.402
    return np.stack([y, cb, cr])


def ycbcr_to_rgb(ycbcr: np.ndarray) -> ImageTensor:
    """Inverse of rgb_to_ycbcr, clamped back into [0, 1]."""
    y, cb, cr = np.asarray(ycbcr, dtype=np.float64)
    r = y + 1.402 * (cr - 0.5)
    b = y + 1.772 * (cb - 0.5)
    g = (y - _LUMA_R * r - _LUMA_B * b) / _LUMA_G
    return ImageTensor(np.clip(np.stack([r, g, b]), 0.0, 1.0))
