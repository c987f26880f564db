from .export import (
    MissingTensor,
    ShapeMismatch,
    export_checkpoint,
    export_random_extractor,
    load_checkpoint,
)
from .topologies import TOPOLOGIES, UnknownTopology, build_topology

__all__ = [
    "MissingTensor", "ShapeMismatch", "TOPOLOGIES", "UnknownTopology",
    "build_topology", "export_checkpoint", "export_random_extractor",
    "load_checkpoint",
]
