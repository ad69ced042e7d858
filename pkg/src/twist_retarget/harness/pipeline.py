"""Frame-by-frame pipeline: palm frame, pinch gate, twist intent, retargeting."""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence

import numpy as np

from ..errors import ConfigInvalid, DegenerateKeypoints, GeometryError, TrajectoryInvalid
from ..hand_model import HandModel
from ..metrics import AngleSeries
from ..palm_frame import HandFrameSample, build_palm_frame
from ..retarget import RefineConfig, RetargetSession, VectorRetargetConfig, objective
from ..tripod_intent import (
    IntentConfig,
    IntentState,
    PinchGateConfig,
    build_tool_frame,
    human_screw_axis,
    update_gate,
    update_intent,
)

METHODS = ("dextwist", "vector")
PALM_NORMAL = np.array([0.0, 0.0, 1.0])
_HUMAN_TIPS = {"thumb": "thumb_tip", "index": "index_tip", "middle": "middle_tip", "ring": "ring_tip"}


@dataclass(frozen=True)
class PipelineConfig:
    gate: PinchGateConfig = field(default_factory=PinchGateConfig)
    intent: IntentConfig = field(default_factory=IntentConfig)
    refine: RefineConfig = field(default_factory=RefineConfig)
    baseline: VectorRetargetConfig = field(default_factory=VectorRetargetConfig)


@dataclass
class FrameRecord:
    t: float
    gate_active: bool
    theta_task_deg: float
    theta_r_deg: float  # accumulated robot turning: previous episodes plus this one
    theta_gt_deg: float
    axis_dev_deg: float
    J_total: float
    J_rot: float
    J_conn: float
    J_axis: float
    J_pos: float
    q_cmd: np.ndarray
    frame_time: float = 0.0  # s, not exported
    refined: bool = False  # not exported


CSV_COLUMNS = ("t", "gate_active", "theta_task_deg", "theta_r_deg", "theta_gt_deg", "axis_dev_deg",
               "J_total", "J_rot", "J_conn", "J_axis", "J_pos")

NAN = float("nan")


def run_pipeline(trajectory: Sequence[HandFrameSample], gt: Optional[AngleSeries], method: str,
                 model: HandModel, cfg: PipelineConfig = PipelineConfig()) -> List[FrameRecord]:
    if method not in METHODS:
        raise ConfigInvalid(f"method must be one of {METHODS}")
    if gt is not None and len(gt.t) != len(trajectory):
        raise TrajectoryInvalid("ground truth length does not match the trajectory")
    session = RetargetSession(model, method, cfg.refine, cfg.baseline)
    intent = IntentState()
    carry = 0.0  # robot turning banked by finished episodes
    episode_theta = 0.0
    records: List[FrameRecord] = []
    for i, sample in enumerate(trajectory):
        t0 = time.perf_counter()
        try:
            palm = build_palm_frame(sample)
        except DegenerateKeypoints:
            palm = None
        human = {}
        if palm is not None:
            for finger, key in _HUMAN_TIPS.items():
                if key in sample.keypoints:
                    human[finger] = palm.to_palm(sample.keypoints[key])
            p_th, p_ind, p_mid = human["thumb"], human["index"], human["middle"]
            gate = update_gate(intent.gate, float(np.linalg.norm(p_ind - p_th)),
                               float(np.linalg.norm(p_mid - p_th)), cfg.gate)
            intent = replace(intent, gate=gate)
            tool = axis = None
            if gate.active:
                try:
                    prev = intent.prev_axis if cfg.intent.axis_flip_guard else None
                    axis = human_screw_axis(p_th, p_ind, p_mid, PALM_NORMAL, prev)
                    tool = build_tool_frame(p_th, p_ind, p_mid, axis)
                except GeometryError:
                    tool = axis = None
            intent = update_intent(intent, tool, cfg.intent, gate.active, axis)
        active = intent.gate.active
        if active and not session.was_active:
            episode_theta = 0.0
        if not active and session.was_active:
            carry += episode_theta
        if palm is None:
            step = None
            q_cmd = session.q_prev
        else:
            step = session.step(human, active, intent.theta_task)
            q_cmd = step.output.q_cmd
        elapsed = time.perf_counter() - t0

        theta_r = carry
        axis_dev = NAN
        terms = (NAN,) * 5
        if active and step is not None and np.isfinite(step.theta_r):
            episode_theta = step.theta_r
            theta_r = carry + episode_theta
            axis_dev = float(np.degrees(np.arccos(min(1.0, abs(float(step.axis @ session.ref.a_ref))))))
            try:
                bd = objective(model, q_cmd, session.ref, step.theta_target, cfg.refine, step.axis)
                terms = (bd.total, bd.rot_term, bd.conn_term, bd.axis_term, bd.pos_term)
            except GeometryError:
                pass
        elif active:
            theta_r = carry + episode_theta
        records.append(FrameRecord(
            t=sample.t,
            gate_active=bool(active),
            theta_task_deg=float(np.degrees(intent.theta_task)),
            theta_r_deg=float(np.degrees(theta_r)),
            theta_gt_deg=float(np.degrees(gt.value[i])) if gt is not None else NAN,
            axis_dev_deg=axis_dev,
            J_total=terms[0], J_rot=terms[1], J_conn=terms[2], J_axis=terms[3], J_pos=terms[4],
            q_cmd=np.array(q_cmd, dtype=float),
            frame_time=elapsed,
            refined=bool(step is not None and step.output.refined),
        ))
    return records


def method_series(records: Sequence[FrameRecord]) -> AngleSeries:
    return AngleSeries(np.array([r.t for r in records]), np.radians([r.theta_r_deg for r in records]),
                       np.array([r.gate_active for r in records], dtype=bool))


def task_series(records: Sequence[FrameRecord]) -> AngleSeries:
    return AngleSeries(np.array([r.t for r in records]), np.radians([r.theta_task_deg for r in records]),
                       np.array([r.gate_active for r in records], dtype=bool))
