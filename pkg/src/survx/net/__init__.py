"""Minimal CNN engine: graph spec, forward/backward, NNWB weight container."""

from .engine import Tape, backward, forward
from .graph import INPUT, NetworkSpec, Node, OP_KINDS, validate_spec
from .weights import (
    load_weights,
    required_parameters,
    save_weights,
    validate_weights,
)

__all__ = [
    "INPUT", "NetworkSpec", "Node", "OP_KINDS", "Tape",
    "backward", "forward", "load_weights", "required_parameters",
    "save_weights", "validate_spec", "validate_weights",
]
