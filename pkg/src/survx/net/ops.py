"""Layer forward/backward kernels on (C, H, W) float64 arrays.

conv2d follows the cross-correlation convention (no kernel flip) with zero
padding; all accumulations run in double precision.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import (
    ChannelNotDivisible,
    EmptyOutput,
    ShapeMismatch,
    SlopeShapeMismatch,
)


def conv_out_size(n: int, f: int, stride: int, padding: int) -> int:
    return (n + 2 * padding - f) // stride + 1


def _im2col(x: np.ndarray, f: int, stride: int, padding: int):
    """Padded input -> (H'*W', C*f*f) patch matrix."""
    c, h, w = x.shape
    xp = np.pad(x, ((0, 0), (padding, padding), (padding, padding))) if padding else x
    windows = sliding_window_view(xp, (f, f), axis=(1, 2))   # (C, Hp-f+1, Wp-f+1, f, f)
    windows = windows[:, ::stride, ::stride]
    _, ho, wo, _, _ = windows.shape
    cols = windows.transpose(1, 2, 0, 3, 4).reshape(ho * wo, c * f * f)
    return cols, ho, wo, xp.shape


def conv2d(x: np.ndarray, weight: np.ndarray, bias: np.ndarray,
           stride: int = 1, padding: int = 0) -> np.ndarray:
    if x.ndim != 3 or weight.ndim != 4:
        raise ShapeMismatch(f"conv2d input rank {x.ndim}, weight rank {weight.ndim}")
    c, h, w = x.shape
    k, cw, f, f2 = weight.shape
    if f != f2:
        raise ShapeMismatch(f"non-square kernel {f}x{f2}")
    if cw != c:
        raise ShapeMismatch(f"weight expects {cw} input channels, tensor has {c}")
    if bias.shape != (k,):
        raise ShapeMismatch(f"bias shape {bias.shape}, expected ({k},)")
    ho = conv_out_size(h, f, stride, padding)
    wo = conv_out_size(w, f, stride, padding)
    if ho < 1 or wo < 1:
        raise EmptyOutput(f"conv output {ho}x{wo}")
    cols, ho, wo, _ = _im2col(x, f, stride, padding)
    out = cols @ weight.reshape(k, -1).T + bias
    return out.T.reshape(k, ho, wo)


def conv2d_backward(x: np.ndarray, weight: np.ndarray, grad_out: np.ndarray,
                    stride: int, padding: int):
    """Gradients (d_input, d_weight, d_bias) for conv2d."""
    c, h, w = x.shape
    k, _, f, _ = weight.shape
    _, ho, wo = grad_out.shape
    g2 = grad_out.reshape(k, -1)

    cols, _, _, padded_shape = _im2col(x, f, stride, padding)
    d_weight = (g2 @ cols).reshape(k, c, f, f)
    d_bias = grad_out.sum(axis=(1, 2))

    # scatter the kernel-weighted gradient back onto the padded input
    t = np.tensordot(weight, grad_out, axes=([0], [0]))   # (C, f, f, H', W')
    dxp = np.zeros(padded_shape)
    for i in range(f):
        for j in range(f):
            dxp[:, i:i + stride * ho:stride, j:j + stride * wo:stride] += t[:, i, j]
    if padding:
        d_input = dxp[:, padding:padding + h, padding:padding + w]
    else:
        d_input = dxp
    return d_input, d_weight, d_bias


def pixel_shuffle(x: np.ndarray, r: int) -> np.ndarray:
    cr2, h, w = x.shape
    if cr2 % (r * r):
        raise ChannelNotDivisible(f"{cr2} channels not divisible by r^2={r*r}")
    c = cr2 // (r * r)
    return x.reshape(c, r, r, h, w).transpose(0, 3, 1, 4, 2).reshape(c, h * r, w * r)


def pixel_unshuffle(x: np.ndarray, r: int) -> np.ndarray:
    c, hr, wr = x.shape
    if hr % r or wr % r:
        raise ShapeMismatch(f"spatial dims {hr}x{wr} not divisible by {r}")
    h, w = hr // r, wr // r
    return x.reshape(c, h, r, w, r).transpose(0, 2, 4, 1, 3).reshape(c * r * r, h, w)


def prelu(x: np.ndarray, slope: np.ndarray) -> np.ndarray:
    if slope.shape != (x.shape[0],):
        raise SlopeShapeMismatch(f"slope shape {slope.shape} for {x.shape[0]} channels")
    a = slope[:, None, None]
    return np.where(x > 0, x, a * x)


def prelu_backward(x: np.ndarray, slope: np.ndarray, g: np.ndarray):
    a = slope[:, None, None]
    d_input = np.where(x > 0, g, a * g)
    d_slope = np.where(x > 0, 0.0, g * x).sum(axis=(1, 2))
    return d_input, d_slope


def leaky_relu(x: np.ndarray, alpha: float) -> np.ndarray:
    return np.where(x > 0, x, alpha * x)


def leaky_relu_backward(x: np.ndarray, alpha: float, g: np.ndarray) -> np.ndarray:
    return np.where(x > 0, g, alpha * g)


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_backward(x: np.ndarray, g: np.ndarray) -> np.ndarray:
    return np.where(x > 0, g, 0.0)


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def batchnorm_inference(x, gamma, beta, mean, var, eps: float = 1e-5):
    for name, p in (("gamma", gamma), ("beta", beta), ("mean", mean), ("var", var)):
        if p.shape != (x.shape[0],):
            raise ShapeMismatch(f"batchnorm {name} shape {p.shape} for {x.shape[0]} channels")
    inv = 1.0 / np.sqrt(var + eps)
    return (gamma * inv)[:, None, None] * (x - mean[:, None, None]) + beta[:, None, None]


def batchnorm_backward(x, gamma, mean, var, g, eps: float = 1e-5):
    inv = 1.0 / np.sqrt(var + eps)
    d_input = (gamma * inv)[:, None, None] * g
    xn = (x - mean[:, None, None]) * inv[:, None, None]
    d_gamma = (g * xn).sum(axis=(1, 2))
    d_beta = g.sum(axis=(1, 2))
    return d_input, d_gamma, d_beta


def maxpool2(x: np.ndarray):
    """2x2/stride-2 max pool; returns (output, argmax one-hot for backward)."""
    c, h, w = x.shape
    h2, w2 = h // 2, w // 2
    if h2 < 1 or w2 < 1:
        raise EmptyOutput(f"maxpool2 on {h}x{w}")
    blocks = x[:, :2 * h2, :2 * w2].reshape(c, h2, 2, w2, 2).transpose(0, 1, 3, 2, 4)
    flat = blocks.reshape(c, h2, w2, 4)
    arg = flat.argmax(axis=3)
    out = np.take_along_axis(flat, arg[..., None], axis=3)[..., 0]
    return out, arg


def maxpool2_backward(x_shape, arg: np.ndarray, g: np.ndarray) -> np.ndarray:
    c, h, w = x_shape
    h2, w2 = arg.shape[1], arg.shape[2]
    flat = np.zeros((c, h2, w2, 4))
    np.put_along_axis(flat, arg[..., None], g[..., None], axis=3)
    blocks = flat.reshape(c, h2, w2, 2, 2).transpose(0, 1, 3, 2, 4)
    dx = np.zeros((c, h, w))
    dx[:, :2 * h2, :2 * w2] = blocks.reshape(c, 2 * h2, 2 * w2)
    return dx


def global_mean(x: np.ndarray) -> np.ndarray:
    return x.mean(axis=(1, 2), keepdims=True)


def global_mean_backward(x_shape, g: np.ndarray) -> np.ndarray:
    c, h, w = x_shape
    return np.broadcast_to(g / (h * w), x_shape).copy()


def dense(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> np.ndarray:
    flat = x.reshape(-1)
    if weight.shape[1] != flat.size:
        raise ShapeMismatch(f"dense expects {weight.shape[1]} features, got {flat.size}")
    out = weight @ flat + bias
    return out.reshape(-1, 1, 1)


def dense_backward(x: np.ndarray, weight: np.ndarray, g: np.ndarray):
    gv = g.reshape(-1)
    flat = x.reshape(-1)
    d_weight = np.outer(gv, flat)
    d_bias = gv.copy()
    d_input = (weight.T @ gv).reshape(x.shape)
    return d_input, d_weight, d_bias
