"""Tripod-twist retargeting from tracked human hand keypoints to a robot hand.

The human side estimates a tripod screw axis and accumulated turning angle;
the robot side refines a vector-retargeted joint command so the robot tripod
turns by the same angle about a stable axis.
"""
from .errors import (
    ConfigInvalid,
    DegenerateKeypoints,
    DegenerateTripod,
    GeometryError,
    InputError,
    TrajectoryInvalid,
    TwistRetargetError,
)
from .hand_model import HandModel, default_model, load_hand_model
from .retarget import RefineConfig, RetargetSession, VectorRetargetConfig, refine, vector_retarget

__version__ = "0.1.0"

__all__ = [
    "ConfigInvalid", "DegenerateKeypoints", "DegenerateTripod", "GeometryError", "InputError",
    "TrajectoryInvalid", "TwistRetargetError", "HandModel", "default_model", "load_hand_model",
    "RefineConfig", "RetargetSession", "VectorRetargetConfig", "refine", "vector_retarget",
]
