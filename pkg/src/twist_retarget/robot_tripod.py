"""Robot tripod geometry: tool frame, normal, closure, centroid and turn angle."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict

import numpy as np

from .errors import DegenerateTripod, ThumbOnAxis
from .hand_model import FINGER_NAMES, TRIPOD_FINGERS, HandModel
from .se3 import EPS_LEN, so3_log
from .tripod_intent import ToolFrame, build_tool_frame, human_screw_axis

PALM_NORMAL = np.array([0.0, 0.0, 1.0])
_TRIPOD_ROWS = [FINGER_NAMES.index(f) for f in TRIPOD_FINGERS]
_PAIRS = ((0, 1), (0, 2), (1, 2))  # thumb-index, thumb-middle, index-middle
_PAIR_I = [i for i, _ in _PAIRS]
_PAIR_J = [j for _, j in _PAIRS]


@dataclass(frozen=True)
class RobotTripodState:
    tips: np.ndarray  # (3, 3), rows thumb/index/middle, palm frame
    centroid: np.ndarray
    normal: np.ndarray
    closure: np.ndarray  # pairwise distances in _PAIRS order
    tool: ToolFrame

    def tip_map(self) -> Dict[str, np.ndarray]:
        return dict(zip(TRIPOD_FINGERS, self.tips))


@dataclass(frozen=True)
class TripodReference:
    tool_ref: ToolFrame
    a_ref: np.ndarray
    e_ref: np.ndarray
    c_ref: np.ndarray


def closure_distances(tips) -> np.ndarray:
    tips = np.asarray(tips, dtype=float)
    return np.linalg.norm(tips[..., _PAIR_J, :] - tips[..., _PAIR_I, :], axis=-1)


def tripod_state_from_tips(tips, prev_axis=None) -> RobotTripodState:
    tips = np.array(tips, dtype=float)
    axis = human_screw_axis(tips[0], tips[1], tips[2], PALM_NORMAL, prev_axis)
    tool = build_tool_frame(tips[0], tips[1], tips[2], axis)
    return RobotTripodState(tips, tool.origin, axis, closure_distances(tips), tool)


def compute_tripod_state(model: HandModel, q, prev_axis=None) -> RobotTripodState:
    tips = model.tip_positions(np.asarray(q, dtype=float))[_TRIPOD_ROWS]
    return tripod_state_from_tips(tips, prev_axis)


def latch_reference(state: RobotTripodState) -> TripodReference:
    def frozen(a):
        a = np.array(a, dtype=float)
        a.flags.writeable = False
        return a

    tool = ToolFrame(frozen(state.tool.rotation), frozen(state.tool.origin))
    return TripodReference(tool, frozen(state.normal), frozen(state.closure), frozen(state.centroid))


def robot_turn_angle(state: RobotTripodState, ref: TripodReference) -> float:
    """Signed rotation of the tool frame since the reference, about ``a_ref``."""
    R_ref = ref.tool_ref.rotation
    w = so3_log(R_ref.T @ state.tool.rotation)
    return float(ref.a_ref @ (R_ref @ w))


def _cross(a, b):
    out = np.empty(np.broadcast_shapes(a.shape, b.shape))
    out[..., 0] = a[..., 1] * b[..., 2] - a[..., 2] * b[..., 1]
    out[..., 1] = a[..., 2] * b[..., 0] - a[..., 0] * b[..., 2]
    out[..., 2] = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    return out


def _norm(v):
    return np.sqrt(np.einsum("...i,...i->...", v, v))


def tripod_features(tips, align_axis):
    """Batched tripod quantities for tips of shape ``(B, 3, 3)``.

    Returns ``(tool_rotations, normals, closures, centroids)``; normals are
    sign-aligned with ``align_axis``.  Matches ``tripod_state_from_tips`` row by
    row and raises DegenerateTripod if any row is degenerate.
    """
    tips = np.asarray(tips, dtype=float)
    n = _cross(tips[:, 1] - tips[:, 0], tips[:, 2] - tips[:, 0])
    norm = _norm(n)
    if np.any(norm <= EPS_LEN):
        raise DegenerateTripod("fingertips are collinear")
    n /= np.where(n @ align_axis < 0.0, -norm, norm)[:, None]
    c = tips.mean(axis=1)
    d = tips[:, 0] - c
    d -= np.einsum("ij,ij->i", d, n)[:, None] * n
    dn = _norm(d)
    if np.any(dn <= EPS_LEN):
        raise ThumbOnAxis("thumb lies on the screw axis through the centroid")
    d /= dn[:, None]
    R = np.empty((len(tips), 3, 3))
    R[:, :, 0] = d
    R[:, :, 1] = _cross(n, d)
    R[:, :, 2] = n
    diff = tips[:, _PAIR_J] - tips[:, _PAIR_I]
    return R, n, _norm(diff), c


def tripod_tips(model: HandModel, Q) -> np.ndarray:
    return model.tip_positions(Q)[..., _TRIPOD_ROWS, :]
