"""Human palm frame from headset keypoints, and the arm pose command."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import ConfigInvalid, DegenerateKeypoints, DegenerateVector, TrajectoryInvalid
from .se3 import Transform, unit

REQUIRED_KEYPOINTS = (
    "wrist",
    "index_knuckle",
    "pinky_knuckle",
    "thumb_tip",
    "index_tip",
    "middle_tip",
)


@dataclass(frozen=True)
class HandFrameSample:
    """One tracked frame: time stamp and named keypoints in the headset frame."""

    t: float
    keypoints: Mapping[str, np.ndarray]

    def __post_init__(self):
        missing = [k for k in REQUIRED_KEYPOINTS if k not in self.keypoints]
        if missing:
            raise TrajectoryInvalid(f"missing keypoints: {', '.join(missing)}")
        kps = {}
        for name, p in self.keypoints.items():
            arr = np.asarray(p, dtype=float)
            if arr.shape != (3,) or not np.all(np.isfinite(arr)):
                raise TrajectoryInvalid(f"keypoint {name!r} must be 3 finite numbers")
            kps[name] = arr
        if not np.isfinite(self.t):
            raise TrajectoryInvalid("time stamp must be finite")
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "keypoints", kps)


@dataclass(frozen=True)
class PalmFrame:
    pose: Transform  # palm -> headset

    def to_palm(self, points) -> np.ndarray:
        """Re-express headset-frame points in the palm frame."""
        p = np.asarray(points, dtype=float)
        return (p - self.pose.translation) @ self.pose.rotation

    @property
    def normal(self) -> np.ndarray:
        return self.pose.rotation[:, 2]


@dataclass(frozen=True)
class ArmCommandConfig:
    base_alignment: Transform = Transform()
    translation_scale: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.translation_scale <= 10.0:
            raise ConfigInvalid("translation_scale must lie in (0, 10]")


@dataclass(frozen=True)
class ArmCommand:
    pose: Transform
    t: float


def build_palm_frame(sample: HandFrameSample) -> PalmFrame:
    kp = sample.keypoints
    p_w = kp["wrist"]
    try:
        x = unit(kp["index_knuckle"] - p_w)
        z = unit(np.cross(x, kp["pinky_knuckle"] - p_w))
    except DegenerateVector as exc:
        raise DegenerateKeypoints(f"palm keypoints degenerate at t={sample.t}: {exc}") from exc
    y = np.cross(z, x)
    return PalmFrame(Transform(np.column_stack([x, y, z]), p_w))


def compose_arm_command(frame: PalmFrame, cfg: ArmCommandConfig, t: float = 0.0) -> ArmCommand:
    # T_scale acts on translation only
    scaled = Transform(frame.pose.rotation, cfg.translation_scale * frame.pose.translation)
    return ArmCommand(cfg.base_alignment @ scaled, t)
