"""Tripod pinch gate, human screw axis, tool frame and accumulated twist angle."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import ConfigInvalid, DegenerateTripod, DegenerateVector, NearPiRotation, ThumbOnAxis
from .se3 import EPS_LEN, so3_log, unit


@dataclass(frozen=True)
class PinchGateConfig:
    d_on: float = 0.045
    d_off: float = 0.065
    n_on: int = 3
    n_off: int = 3

    def __post_init__(self):
        if not 0.0 < self.d_on < self.d_off:
            raise ConfigInvalid("need 0 < d_on < d_off")
        if self.n_on < 1 or self.n_off < 1:
            raise ConfigInvalid("n_on and n_off must be >= 1")


@dataclass(frozen=True)
class PinchGateState:
    active: bool = False
    consecutive_on: int = 0
    consecutive_off: int = 0
    episode_id: int = 0


def update_gate(state: PinchGateState, d_thumb_index: float, d_thumb_middle: float,
                cfg: PinchGateConfig) -> PinchGateState:
    """Advance the hysteresis gate by one frame.

    Pinch frames (both distances below ``d_on``) count toward activation and
    release frames (either distance above ``d_off``) toward deactivation.  A
    frame in the dead band keeps the state and resets the counter that would
    change it.
    """
    pinch = d_thumb_index < cfg.d_on and d_thumb_middle < cfg.d_on
    release = d_thumb_index > cfg.d_off or d_thumb_middle > cfg.d_off
    on = state.consecutive_on + 1 if pinch else 0
    off = state.consecutive_off + 1 if release else 0
    if not state.active and on >= cfg.n_on:
        return PinchGateState(True, on, 0, state.episode_id + 1)
    if state.active and off >= cfg.n_off:
        return PinchGateState(False, 0, off, state.episode_id)
    return PinchGateState(state.active, on, off, state.episode_id)


def tripod_normal(p_th, p_ind, p_mid) -> np.ndarray:
    """Unit normal of the fingertip triangle, thumb as the apex."""
    try:
        return unit(np.cross(np.subtract(p_ind, p_th), np.subtract(p_mid, p_th)))
    except DegenerateVector as exc:
        raise DegenerateTripod("fingertips are collinear") from exc


def human_screw_axis(p_th, p_ind, p_mid, palm_normal, prev_axis=None) -> np.ndarray:
    a = tripod_normal(p_th, p_ind, p_mid)
    ref = palm_normal if prev_axis is None else prev_axis
    return -a if a @ ref < 0.0 else a


@dataclass(frozen=True)
class ToolFrame:
    rotation: np.ndarray
    origin: np.ndarray


def build_tool_frame(p_th, p_ind, p_mid, axis) -> ToolFrame:
    """Centroid origin, z along ``axis``, x toward the thumb projected off-axis."""
    tips = np.array([p_th, p_ind, p_mid], dtype=float)
    tripod_normal(*tips)
    z = np.asarray(axis, dtype=float)
    c = tips.mean(axis=0)
    d = tips[0] - c
    d = d - (d @ z) * z
    n = np.linalg.norm(d)
    if n <= EPS_LEN:
        raise ThumbOnAxis("thumb lies on the screw axis through the centroid")
    x = d / n
    return ToolFrame(np.column_stack([x, np.cross(z, x), z]), c)


@dataclass(frozen=True)
class IntentConfig:
    dtheta_clip: float = 0.2
    axis_flip_guard: bool = True

    def __post_init__(self):
        if not self.dtheta_clip > 0.0:
            raise ConfigInvalid("dtheta_clip must be positive")


@dataclass(frozen=True)
class IntentState:
    theta_task: float = 0.0
    a_task: Optional[np.ndarray] = None
    prev_tool: Optional[ToolFrame] = None
    prev_axis: Optional[np.ndarray] = None
    gate: PinchGateState = PinchGateState()
    dropped_frames: int = 0


def update_intent(state: IntentState, tool: Optional[ToolFrame], cfg: IntentConfig,
                  active: bool, axis=None) -> IntentState:
    """Accumulate the twist angle for one frame.

    ``axis`` is the frame's disambiguated screw axis; it is latched as
    ``a_task`` on the first active frame of an episode (defaults to the tool
    z axis).  A ``None`` tool on an active frame is a dropped frame.
    """
    if not active:
        return replace(state, prev_tool=None, prev_axis=None)
    if tool is None:
        return replace(state, dropped_frames=state.dropped_frames + 1)
    if axis is None:
        axis = tool.rotation[:, 2]
    if state.prev_tool is None:
        # first active frame of an episode: latch the axis, no increment
        axis = np.asarray(axis, dtype=float)
        return replace(state, a_task=axis, prev_tool=tool, prev_axis=axis)
    R_prev = state.prev_tool.rotation
    try:
        w = so3_log(R_prev.T @ tool.rotation)
    except NearPiRotation:
        return replace(state, dropped_frames=state.dropped_frames + 1)
    # the log is a body-frame vector; bring it into palm coordinates before projecting
    dtheta = float(np.clip(state.a_task @ (R_prev @ w), -cfg.dtheta_clip, cfg.dtheta_clip))
    return replace(state, theta_task=state.theta_task + dtheta, prev_tool=tool,
                   prev_axis=np.asarray(axis, dtype=float))
