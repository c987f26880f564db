"""Network graph description and validation.

A NetworkSpec is an ordered DAG of named nodes; node inputs reference
earlier nodes or the reserved graph input name "input".  The JSON form
mirrors the node fields one-to-one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..errors import GraphError

INPUT = "input"

OP_KINDS = frozenset({
    "conv2d", "prelu", "leaky_relu", "relu", "tanh", "sigmoid",
    "batchnorm_inference", "pixel_shuffle", "add", "maxpool2",
    "global_mean", "dense",
})

_ARITY = {"add": 2}


@dataclass
class Node:
    name: str
    op_kind: str
    inputs: list[str]
    params: dict = field(default_factory=dict)


@dataclass
class NetworkSpec:
    nodes: list[Node]
    outputs: list[str]
    input_channels: int | None = None

    def node(self, name: str) -> Node:
        for n in self.nodes:
            if n.name == name:
                return n
        raise GraphError(f"no node named {name!r}")

    def validate(self) -> None:
        validate_spec(self)

    def to_json(self) -> str:
        doc = {
            "input_channels": self.input_channels,
            "nodes": [
                {"name": n.name, "op_kind": n.op_kind, "inputs": list(n.inputs),
                 "params": dict(n.params)}
                for n in self.nodes
            ],
            "outputs": list(self.outputs),
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "NetworkSpec":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise GraphError(f"bad NetworkSpec JSON: {exc}") from exc
        try:
            nodes = [
                Node(d["name"], d["op_kind"], list(d["inputs"]), dict(d.get("params", {})))
                for d in doc["nodes"]
            ]
            spec = cls(nodes, list(doc["outputs"]), doc.get("input_channels"))
        except (KeyError, TypeError) as exc:
            raise GraphError(f"NetworkSpec JSON missing field: {exc}") from exc
        spec.validate()
        return spec


def _out_channels(node: Node, in_channels):
    """Channel count leaving a node, or None when untracked."""
    op = node.op_kind
    if op == "conv2d":
        return node.params["out_channels"]
    if op == "pixel_shuffle":
        r = node.params["r"]
        if in_channels is None:
            return None
        if in_channels % (r * r):
            raise GraphError(f"{node.name}: {in_channels} channels not divisible by r^2={r*r}")
        return in_channels // (r * r)
    if op == "dense":
        return node.params["features_out"]
    return in_channels


def validate_spec(spec: NetworkSpec) -> None:
    seen: dict[str, object] = {}
    for node in spec.nodes:
        if node.op_kind not in OP_KINDS:
            raise GraphError(f"{node.name}: unknown op_kind {node.op_kind!r}")
        if node.name == INPUT or node.name in seen:
            raise GraphError(f"duplicate or reserved node name {node.name!r}")
        arity = _ARITY.get(node.op_kind, 1)
        if len(node.inputs) != arity:
            raise GraphError(f"{node.name}: {node.op_kind} takes {arity} input(s)")
        in_ch = None
        for src in node.inputs:
            if src == INPUT:
                ch = spec.input_channels
            elif src in seen:
                ch = seen[src]
            else:
                raise GraphError(f"{node.name}: input {src!r} is not an earlier node")
            if in_ch is None:
                in_ch = ch
            elif ch is not None and in_ch is not None and ch != in_ch:
                raise GraphError(f"{node.name}: add operands carry {in_ch} vs {ch} channels")
        if node.op_kind == "conv2d" and in_ch is not None:
            if node.params["in_channels"] != in_ch:
                raise GraphError(
                    f"{node.name}: declares in_channels={node.params['in_channels']}"
                    f" but receives {in_ch}"
                )
        seen[node.name] = _out_channels(node, in_ch)
    for out in spec.outputs:
        if out not in seen:
            raise GraphError(f"output {out!r} is not a node")
