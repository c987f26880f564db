"""Deterministic forward evaluation and reverse-mode gradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import MissingWeight, NoTape, ShapeMismatch
from . import ops
from .graph import INPUT, NetworkSpec


@dataclass
class Tape:
    spec: NetworkSpec
    weights: dict
    acts: dict       # node name -> activation (includes "input")
    aux: dict        # per-node extras (maxpool argmax)


def _param(weights: dict, node_name: str, part: str) -> np.ndarray:
    key = f"{node_name}.{part}"
    if key not in weights:
        raise MissingWeight(key)
    return weights[key]


def _eval_node(node, weights, acts, aux):
    x = acts[node.inputs[0]]
    op = node.op_kind
    p = node.params
    try:
        if op == "conv2d":
            return ops.conv2d(x, _param(weights, node.name, "weight"),
                              _param(weights, node.name, "bias"),
                              p.get("stride", 1), p.get("padding", 0))
        if op == "prelu":
            return ops.prelu(x, _param(weights, node.name, "slope"))
        if op == "leaky_relu":
            return ops.leaky_relu(x, p.get("alpha", 0.2))
        if op == "relu":
            return ops.relu(x)
        if op == "tanh":
            return np.tanh(x)
        if op == "sigmoid":
            return ops.sigmoid(x)
        if op == "batchnorm_inference":
            return ops.batchnorm_inference(
                x, _param(weights, node.name, "gamma"), _param(weights, node.name, "beta"),
                _param(weights, node.name, "mean"), _param(weights, node.name, "var"))
        if op == "pixel_shuffle":
            return ops.pixel_shuffle(x, p["r"])
        if op == "add":
            y = acts[node.inputs[1]]
            if x.shape != y.shape:
                raise ShapeMismatch(f"add operands {x.shape} vs {y.shape}")
            return x + y
        if op == "maxpool2":
            out, arg = ops.maxpool2(x)
            aux[node.name] = arg
            return out
        if op == "global_mean":
            return ops.global_mean(x)
        if op == "dense":
            return ops.dense(x, _param(weights, node.name, "weight"),
                             _param(weights, node.name, "bias"))
    except ShapeMismatch as exc:
        raise ShapeMismatch(f"{node.name}: {exc}") from exc
    raise ShapeMismatch(f"{node.name}: unhandled op {op!r}")


def forward(spec: NetworkSpec, weights: dict, x: np.ndarray,
            record_tape: bool = False):
    """Evaluate the graph; returns list of tapped outputs (+ Tape if asked)."""
    x = np.asarray(x, dtype=np.float64)
    if spec.input_channels is not None and x.shape[0] != spec.input_channels:
        raise ShapeMismatch(
            f"graph expects {spec.input_channels} input channels, got {x.shape[0]}")
    acts: dict = {INPUT: x}
    aux: dict = {}
    for node in spec.nodes:
        acts[node.name] = _eval_node(node, weights, acts, aux)
    outputs = [acts[name] for name in spec.outputs]
    if record_tape:
        return outputs, Tape(spec, weights, acts, aux)
    return outputs


def backward(tape: Tape, output_gradient):
    """Reverse-mode gradients.

    output_gradient: one array per tapped output (a bare array is accepted
    for single-output graphs).  Returns (param_grads, input_grad); frozen
    batch-norm running statistics are not differentiated.
    """
    if tape is None or not isinstance(tape, Tape):
        raise NoTape("backward requires a tape from forward(record_tape=True)")
    spec, weights, acts, aux = tape.spec, tape.weights, tape.acts, tape.aux
    if isinstance(output_gradient, np.ndarray):
        output_gradient = [output_gradient]
    if len(output_gradient) != len(spec.outputs):
        raise ShapeMismatch(
            f"{len(output_gradient)} output gradients for {len(spec.outputs)} outputs")

    grads: dict = {}
    for name, g in zip(spec.outputs, output_gradient):
        g = np.asarray(g, dtype=np.float64)
        if g.shape != acts[name].shape:
            raise ShapeMismatch(f"gradient for {name!r} has shape {g.shape}")
        grads[name] = grads.get(name, 0.0) + g

    param_grads: dict = {}

    def send(name: str, g: np.ndarray) -> None:
        grads[name] = g if name not in grads else grads[name] + g

    for node in reversed(spec.nodes):
        g = grads.pop(node.name, None)
        if g is None:
            continue
        x = acts[node.inputs[0]]
        op = node.op_kind
        p = node.params
        if op == "conv2d":
            w = _param(weights, node.name, "weight")
            dx, dw, db = ops.conv2d_backward(x, w, g, p.get("stride", 1), p.get("padding", 0))
            param_grads[f"{node.name}.weight"] = dw
            param_grads[f"{node.name}.bias"] = db
        elif op == "prelu":
            dx, ds = ops.prelu_backward(x, _param(weights, node.name, "slope"), g)
            param_grads[f"{node.name}.slope"] = ds
        elif op == "leaky_relu":
            dx = ops.leaky_relu_backward(x, p.get("alpha", 0.2), g)
        elif op == "relu":
            dx = ops.relu_backward(x, g)
        elif op == "tanh":
            y = acts[node.name]
            dx = g * (1.0 - y * y)
        elif op == "sigmoid":
            y = acts[node.name]
            dx = g * y * (1.0 - y)
        elif op == "batchnorm_inference":
            dx, dgamma, dbeta = ops.batchnorm_backward(
                x, _param(weights, node.name, "gamma"),
                _param(weights, node.name, "mean"), _param(weights, node.name, "var"), g)
            param_grads[f"{node.name}.gamma"] = dgamma
            param_grads[f"{node.name}.beta"] = dbeta
        elif op == "pixel_shuffle":
            dx = ops.pixel_unshuffle(g, p["r"])
        elif op == "add":
            send(node.inputs[1], g)
            dx = g
        elif op == "maxpool2":
            dx = ops.maxpool2_backward(x.shape, aux[node.name], g)
        elif op == "global_mean":
            dx = ops.global_mean_backward(x.shape, g)
        elif op == "dense":
            dx, dw, db = ops.dense_backward(x, _param(weights, node.name, "weight"), g)
            param_grads[f"{node.name}.weight"] = dw
            param_grads[f"{node.name}.bias"] = db
        else:  # pragma: no cover
            raise ShapeMismatch(f"{node.name}: unhandled op {op!r}")
        send(node.inputs[0], dx)

    input_grad = grads.get(INPUT)
    if input_grad is None:
        input_grad = np.zeros_like(acts[INPUT])
    return param_grads, input_grad
