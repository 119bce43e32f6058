"""Streaming discovery of crowds, gatherings and evolving groups."""

from .model import (
    ParamError,
    Params,
    SnapshotCluster,
    TrajectoryPoint,
    Window,
    validate_params,
)

__all__ = [
    "ParamError",
    "Params",
    "SnapshotCluster",
    "TrajectoryPoint",
    "Window",
    "validate_params",
]
__version__ = "0.1.0"
