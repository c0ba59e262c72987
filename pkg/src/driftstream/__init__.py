"""Online micro-cluster stream clustering with time-window adaptive radii."""

from .engine import Engine, Event, assign, predict, restore, snapshot
from .metrics import NOISE_CLASS, ari, ari_score, build_contingency, purity, purity_score
from .model import (
    Adaptive,
    ClusterModel,
    Contingency,
    ContractViolation,
    EngineConfig,
    Fixed,
    MicroCluster,
    Sample,
    StreamError,
    validate_model,
)

__all__ = [
    "Adaptive", "ClusterModel", "Contingency", "ContractViolation", "Engine", "EngineConfig",
    "Event", "Fixed", "MicroCluster", "NOISE_CLASS", "Sample", "StreamError", "ari", "ari_score",
    "assign", "build_contingency", "predict", "purity", "purity_score", "restore", "snapshot",
    "validate_model",
]
