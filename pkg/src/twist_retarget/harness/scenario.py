"""Synthetic tripod-twist trajectories with an analytic ground-truth angle.

The synthetic hand is the robot-scale nominal layout below shrunk by
``human_scale``; only the tripod radius is an absolute length (it is set by
the grasped object).  Keypoints are produced in a fixed headset frame so the
palm-frame construction runs on every frame.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from typing import List, Tuple

import numpy as np

from ..errors import ConfigInvalid
from ..metrics import AngleSeries
from ..palm_frame import HandFrameSample
from ..se3 import Transform, rpy_to_matrix, so3_exp

# Robot-scale nominal layout in the palm frame (x toward the index knuckle,
# y toward the little-finger side, z palmar), matched to the bundled hand.
NOMINAL_INDEX_KNUCKLE = np.array([0.095, 0.0, 0.0])
NOMINAL_PINKY_KNUCKLE = np.array([0.085, 0.080, 0.0])
NOMINAL_RING_TIP = np.array([0.160, 0.080, 0.100])
NOMINAL_TRIPOD_CENTER = np.array([0.127, -0.006, 0.098])
NOMINAL_THUMB_DIRECTION = np.array([0.0, -1.0, 0.0])
# index and middle sit at these angles from the thumb about the screw axis
TRIPOD_PHASES = (0.0, -2.0 * np.pi / 3.0, 2.0 * np.pi / 3.0)

HEADSET_PALM_POSE = Transform(rpy_to_matrix(0.3, -0.2, 1.1), np.array([0.15, -0.10, 0.45]))

OPEN_RADIUS_GAIN = 0.025  # m added to the tripod radius while released
# fractions of a release phase: open, rewind, close, settle
RELEASE_SPLIT = (0.2, 0.4, 0.2, 0.2)
# fraction of an approach phase spent open before the tripod closes
APPROACH_OPEN = 0.6

SEGMENT_KINDS = ("approach", "turn", "hold", "release_and_rewind")


@dataclass(frozen=True)
class Segment:
    kind: str
    duration: float  # s
    rewind_deg: float = 0.0

    def __post_init__(self):
        if self.kind not in SEGMENT_KINDS:
            raise ConfigInvalid(f"unknown segment kind {self.kind!r}")
        if not self.duration > 0:
            raise ConfigInvalid("segment durations must be positive")


@dataclass(frozen=True)
class ScenarioConfig:
    segments: Tuple[Segment, ...]
    frame_rate: float = 50.0
    axis_in_palm: Tuple[float, float, float] = (0.26, -0.36, 0.90)
    turn_rate: float = 60.0  # deg/s
    noise_sigma: float = 0.0  # m
    human_tripod_radius: float = 0.025  # m
    human_scale: float = 0.8
    seed: int = 0
    name: str = "scenario"

    def __post_init__(self):
        segs = tuple(s if isinstance(s, Segment) else Segment(**s) for s in self.segments)
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "axis_in_palm", tuple(float(x) for x in self.axis_in_palm))
        if not segs:
            raise ConfigInvalid("scenario needs at least one segment")
        if not self.frame_rate > 0:
            raise ConfigInvalid("frame_rate must be positive")
        if not self.noise_sigma >= 0:
            raise ConfigInvalid("noise_sigma must be non-negative")
        if not self.human_tripod_radius > 0 or not self.human_scale > 0:
            raise ConfigInvalid("human_tripod_radius and human_scale must be positive")
        if len(self.axis_in_palm) != 3 or not np.linalg.norm(self.axis_in_palm) > 1e-9:
            raise ConfigInvalid("axis_in_palm must be a non-zero 3-vector")

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _phase_frames(cfg: ScenarioConfig) -> List[Tuple[Segment, int]]:
    return [(s, int(round(s.duration * cfg.frame_rate))) for s in cfg.segments]


def _tripod_basis(axis: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    u = NOMINAL_THUMB_DIRECTION - (NOMINAL_THUMB_DIRECTION @ axis) * axis
    if np.linalg.norm(u) < 1e-6:
        u = np.cross(axis, [1.0, 0.0, 0.0])
    u = u / np.linalg.norm(u)
    return u, np.cross(axis, u)


def generate_scenario(cfg: ScenarioConfig):
    """Return ``(trajectory, gt)`` for ``cfg``.

    Ground truth advances only during turn phases and is marked active while
    the tripod is closed (turn, hold, and the settle part of a release).  An
    approach phase starts open and closes the tripod without turning.
    """
    axis = np.asarray(cfg.axis_in_palm, dtype=float)
    axis = axis / np.linalg.norm(axis)
    u, v = _tripod_basis(axis)
    s = cfg.human_scale
    center = s * NOMINAL_TRIPOD_CENTER
    fixed = {
        "wrist": np.zeros(3),
        "index_knuckle": s * NOMINAL_INDEX_KNUCKLE,
        "pinky_knuckle": s * NOMINAL_PINKY_KNUCKLE,
        "ring_tip": s * NOMINAL_RING_TIP,
    }
    rng = np.random.default_rng(cfg.seed)
    step = np.radians(cfg.turn_rate) / cfg.frame_rate
    r0 = cfg.human_tripod_radius

    physical = 0.0  # current tripod rotation angle
    gt = 0.0
    rows = []  # (physical angle, radius, gt, active)
    for seg, n in _phase_frames(cfg):
        seg_start = physical
        rewind = np.radians(seg.rewind_deg)
        for k in range(n):
            frac = (k + 1) / n
            if seg.kind == "turn":
                physical += step
                gt += step
                rows.append((physical, r0, gt, True))
            elif seg.kind == "hold":
                rows.append((physical, r0, gt, True))
            elif seg.kind == "approach":
                g = max(0.0, (frac - APPROACH_OPEN) / (1.0 - APPROACH_OPEN))
                rows.append((physical, r0 + OPEN_RADIUS_GAIN * (1.0 - g), gt, False))
            else:
                f_open, f_rew, f_close, _ = RELEASE_SPLIT
                if frac <= f_open:
                    ang, rad, act = seg_start, r0 + OPEN_RADIUS_GAIN * frac / f_open, False
                elif frac <= f_open + f_rew:
                    ang = seg_start - rewind * (frac - f_open) / f_rew
                    rad, act = r0 + OPEN_RADIUS_GAIN, False
                elif frac <= f_open + f_rew + f_close:
                    g = (frac - f_open - f_rew) / f_close
                    ang, rad, act = seg_start - rewind, r0 + OPEN_RADIUS_GAIN * (1.0 - g), False
                else:
                    ang, rad, act = seg_start - rewind, r0, True
                rows.append((ang, rad, gt, act))
        if seg.kind == "release_and_rewind":
            physical = seg_start - rewind
    traj = []
    dt = 1.0 / cfg.frame_rate
    for i, (ang, rad, _, _) in enumerate(rows):
        R = so3_exp(axis * ang)
        kp = dict(fixed)
        for name, ph in zip(("thumb_tip", "index_tip", "middle_tip"), TRIPOD_PHASES):
            kp[name] = center + R @ (rad * (np.cos(ph) * u + np.sin(ph) * v))
        names = sorted(kp)
        pts = HEADSET_PALM_POSE.apply(np.array([kp[k] for k in names]))
        if cfg.noise_sigma > 0:
            pts = pts + rng.normal(0.0, cfg.noise_sigma, pts.shape)
        traj.append(HandFrameSample(i * dt, dict(zip(names, pts))))
    t = np.arange(len(rows)) * dt
    gt_series = AngleSeries(t, np.array([r[2] for r in rows]), np.array([r[3] for r in rows], dtype=bool))
    return traj, gt_series


def default_suite(noise_sigma: float = 0.0, seed: int = 0) -> List[ScenarioConfig]:
    """Single 120 deg turn, three 60 deg ratchets, and a turn with holds.

    Each scenario opens with the hand approaching the object so the robot has
    settled into the grasp shape before the pinch closes.
    """
    turn = lambda d: Segment("turn", d)
    hold = lambda d: Segment("hold", d)
    release = lambda d, r: Segment("release_and_rewind", d, r)
    approach = Segment("approach", 0.6)
    common = dict(noise_sigma=noise_sigma, seed=seed)
    return [
        ScenarioConfig((approach, hold(0.2), turn(2.0), hold(0.2)), name="single_turn_120", **common),
        ScenarioConfig((approach, hold(0.2), turn(1.0), release(0.5, 60.0), turn(1.0), release(0.5, 60.0),
                        turn(1.0), hold(0.2)), name="ratchet_3x60", **common),
        ScenarioConfig((approach, hold(0.2), turn(0.5), hold(0.4), turn(0.5), hold(0.4), turn(0.5), hold(0.2)),
                       name="turn_with_holds", **common),
    ]
