"""Joint-space retargeters sharing one finite-difference gradient-descent solver.

``refine`` minimizes the virtual-object objective (turn angle tracking,
closure, screw-axis consistency and centroid terms) on the tripod joints.
``vector_retarget`` is the task-space vector matching baseline.
``RetargetSession`` strings them together frame by frame.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numba
import numpy as np

from .errors import ConfigInvalid, DegenerateTripod, GeometryError, NearPiRotation, ThumbOnAxis
from .hand_model import FINGER_NAMES, TRIPOD_FINGERS, HandModel, clamp_to_limits
from .robot_tripod import (
    TripodReference,
    compute_tripod_state,
    latch_reference,
    robot_turn_angle,
    tripod_features,
    tripod_tips,
)
from .se3 import EPS_LEN, EPS_LOG, so3_log


@dataclass(frozen=True)
class RefineConfig:
    w_rot: float = 1.0
    w_conn: float = 200.0
    w_axis: float = 1.0
    w_pos: float = 400.0
    iterations: int = 5
    fd_step: float = 1e-3
    step_size: float = 0.15
    per_iter_clip: float = 0.05

    def __post_init__(self):
        if min(self.w_rot, self.w_conn, self.w_axis, self.w_pos) < 0.0:
            raise ConfigInvalid("objective weights must be non-negative")
        if self.iterations < 1:
            raise ConfigInvalid("iterations must be >= 1")
        if not (self.fd_step > 0 and self.step_size > 0 and self.per_iter_clip > 0):
            raise ConfigInvalid("fd_step, step_size and per_iter_clip must be positive")


@dataclass(frozen=True)
class VectorRetargetConfig:
    scale: float = 1.25
    iterations: int = 20
    fd_step: float = 1e-3
    step_size: float = 5.0
    per_iter_clip: float = 0.05

    def __post_init__(self):
        if not 0.0 < self.scale <= 5.0:
            raise ConfigInvalid("scale must lie in (0, 5]")
        if self.iterations < 1:
            raise ConfigInvalid("iterations must be >= 1")
        if not (self.fd_step > 0 and self.step_size > 0 and self.per_iter_clip > 0):
            raise ConfigInvalid("fd_step, step_size and per_iter_clip must be positive")


@dataclass(frozen=True)
class ObjectiveBreakdown:
    total: float
    rot_term: float
    conn_term: float
    axis_term: float
    pos_term: float


@dataclass(frozen=True)
class RetargetOutput:
    q_cmd: np.ndarray
    breakdown: Optional[ObjectiveBreakdown]
    iterations_used: int
    residual: float = float("nan")  # the minimized cost
    refined: bool = False


def fd_descent(cost: Callable[[np.ndarray], np.ndarray], q0, free: Sequence[int], lower, upper,
               iterations: int, fd_step: float, step_size: float, per_iter_clip: float):
    """Clipped gradient descent with central-difference gradients.

    ``cost`` maps a batch ``(B, n)`` of configurations to ``(B,)`` costs.  Each
    iteration evaluates the current point and its ``2 * len(free)`` central
    perturbations in one batch.  Returns ``(q_best, cost_best, iterations)``
    where ``q_best`` is the lowest-cost iterate visited, ``q0`` included.
    """
    q = np.array(q0, dtype=float)
    free = np.asarray(free, dtype=np.intp)
    k = len(free)
    offsets = np.zeros((2 * k + 1, q.size))
    offsets[1 + np.arange(k), free] = fd_step
    offsets[1 + k + np.arange(k), free] = -fd_step
    best_q, best_c = q.copy(), np.inf
    for _ in range(iterations):
        c = cost(q + offsets)
        if c[0] < best_c:
            best_q, best_c = q.copy(), float(c[0])
        grad = (c[1:k + 1] - c[k + 1:]) / (2.0 * fd_step)
        step = np.clip(-step_size * grad, -per_iter_clip, per_iter_clip)
        q = q.copy()
        q[free] = np.clip(q[free] + step, lower[free], upper[free])
    c_last = float(cost(q[None, :])[0])
    if c_last < best_c:
        best_q, best_c = q, c_last
    return best_q, best_c, iterations


def objective_terms(model: HandModel, Q, ref: TripodReference, theta_target: float,
                    cfg: RefineConfig, align_axis=None) -> np.ndarray:
    """Weighted objective terms for a batch ``Q`` -> ``(B, 4)``.

    Columns: rotation, closure, axis, centroid.  ``align_axis`` fixes the sign
    of the tripod normal for the whole batch (defaults to ``ref.a_ref``).
    Runs the compiled kernel; ``objective_terms_reference`` is the plain
    numpy formulation of the same quantity.
    """
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    align = ref.a_ref if align_axis is None else np.asarray(align_axis, dtype=float)
    R_ref = ref.tool_ref.rotation
    weights = np.array([cfg.w_rot, cfg.w_conn, cfg.w_axis, cfg.w_pos])
    out, status = _objective_kernel(tripod_tips(model, Q), np.ascontiguousarray(R_ref),
                                    np.ascontiguousarray(R_ref.T @ ref.a_ref), ref.a_ref, ref.e_ref,
                                    ref.c_ref, align, float(theta_target), weights)
    if status == 1:
        raise DegenerateTripod("fingertips are collinear")
    if status == 2:
        raise ThumbOnAxis("thumb lies on the screw axis through the centroid")
    if status == 3:
        raise NearPiRotation("tool rotation too close to pi from the reference")
    return out


def objective_terms_reference(model: HandModel, Q, ref: TripodReference, theta_target: float,
                              cfg: RefineConfig, align_axis=None) -> np.ndarray:
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    align = ref.a_ref if align_axis is None else np.asarray(align_axis, dtype=float)
    R, n, e, c = tripod_features(tripod_tips(model, Q), align)
    R_ref = ref.tool_ref.rotation
    theta = so3_log(R_ref.T @ R) @ (R_ref.T @ ref.a_ref)  # axis taken into the reference tool frame
    cos_axis = n @ ref.a_ref
    return np.stack([
        cfg.w_rot * (theta - theta_target) ** 2,
        cfg.w_conn * np.sum((e - ref.e_ref) ** 2, axis=-1),
        cfg.w_axis * (1.0 - cos_axis ** 2),
        cfg.w_pos * np.sum((c - ref.c_ref) ** 2, axis=-1),
    ], axis=-1)


@numba.njit(cache=True)
def _objective_kernel(tips, R_ref, axis_local, a_ref, e_ref, c_ref, align, target, w):
    nb = tips.shape[0]
    out = np.empty((nb, 4))
    R = np.empty((3, 3))
    for b in range(nb):
        t0, t1, t2 = tips[b, 0], tips[b, 1], tips[b, 2]
        u = t1 - t0
        v = t2 - t0
        n = np.array([u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]])
        nn = np.sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2])
        if nn <= EPS_LEN:
            return out, 1
        n /= nn
        if n[0] * align[0] + n[1] * align[1] + n[2] * align[2] < 0.0:
            n = -n
        c = (t0 + t1 + t2) / 3.0
        d = t0 - c
        d -= (d[0] * n[0] + d[1] * n[1] + d[2] * n[2]) * n
        dn = np.sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
        if dn <= EPS_LEN:
            return out, 2
        d /= dn
        y = np.array([n[1] * d[2] - n[2] * d[1], n[2] * d[0] - n[0] * d[2], n[0] * d[1] - n[1] * d[0]])
        for i in range(3):
            R[i, 0], R[i, 1], R[i, 2] = d[i], y[i], n[i]
        M = R_ref.T @ R
        sx = 0.5 * (M[2, 1] - M[1, 2])
        sy = 0.5 * (M[0, 2] - M[2, 0])
        sz = 0.5 * (M[1, 0] - M[0, 1])
        sn = np.sqrt(sx * sx + sy * sy + sz * sz)
        th = np.arctan2(sn, 0.5 * (M[0, 0] + M[1, 1] + M[2, 2] - 1.0))
        if th >= np.pi - EPS_LOG:
            return out, 3
        scale = 1.0 + sn * sn / 6.0 if sn < 1e-8 else th / sn
        theta = scale * (sx * axis_local[0] + sy * axis_local[1] + sz * axis_local[2])
        e = 0.0
        for k in range(3):
            i, j = _PAIR_I_ARR[k], _PAIR_J_ARR[k]
            dd = tips[b, j] - tips[b, i]
            e += (np.sqrt(dd[0] * dd[0] + dd[1] * dd[1] + dd[2] * dd[2]) - e_ref[k]) ** 2
        ca = n[0] * a_ref[0] + n[1] * a_ref[1] + n[2] * a_ref[2]
        dc = c - c_ref
        out[b, 0] = w[0] * (theta - target) ** 2
        out[b, 1] = w[1] * e
        out[b, 2] = w[2] * (1.0 - ca * ca)
        out[b, 3] = w[3] * (dc[0] * dc[0] + dc[1] * dc[1] + dc[2] * dc[2])
    return out, 0


_PAIR_I_ARR = np.array([0, 0, 1])
_PAIR_J_ARR = np.array([1, 2, 2])


def objective(model: HandModel, q, ref: TripodReference, theta_task: float,
              cfg: RefineConfig, align_axis=None) -> ObjectiveBreakdown:
    t = objective_terms(model, np.asarray(q, dtype=float)[None, :], ref, theta_task, cfg, align_axis)[0]
    return ObjectiveBreakdown(float(t.sum()), *(float(x) for x in t))


def refine(model: HandModel, q_init, ref: TripodReference, theta_task: float,
           cfg: RefineConfig = RefineConfig(), align_axis=None) -> RetargetOutput:
    """Residual refinement of the tripod joints toward ``theta_task``.

    Non-tripod joints are frozen.  Raises DegenerateTripod if the tripod is
    degenerate at ``q_init``.
    """
    q_init = np.asarray(q_init, dtype=float)
    if align_axis is None:
        align_axis = compute_tripod_state(model, q_init, ref.a_ref).normal
    objective(model, q_init, ref, theta_task, cfg, align_axis)  # raises on a degenerate start

    def cost(Q):
        return objective_terms(model, Q, ref, theta_task, cfg, align_axis).sum(axis=-1)

    q_best, _, used = fd_descent(cost, q_init, model.tripod_dofs, model.lower, model.upper,
                                 cfg.iterations, cfg.fd_step, cfg.step_size, cfg.per_iter_clip)
    bd = objective(model, q_best, ref, theta_task, cfg, align_axis)
    return RetargetOutput(q_best, bd, used, bd.total, True)


_PAIR_I = [0, 0, 1]  # thumb-index, thumb-middle, index-middle (rows of FINGER_NAMES)
_PAIR_J = [1, 2, 2]


def human_vectors(human_tips_in_palm: Mapping[str, np.ndarray], palm_origin=(0.0, 0.0, 0.0)):
    """Palm-to-tip vectors (rows follow FINGER_NAMES, NaN when absent) and the
    thumb/index/middle tip-to-tip vectors."""
    origin = np.asarray(palm_origin, dtype=float)
    palm = np.full((len(FINGER_NAMES), 3), np.nan)
    for i, f in enumerate(FINGER_NAMES):
        if f in human_tips_in_palm:
            palm[i] = np.asarray(human_tips_in_palm[f], dtype=float) - origin
    return palm, palm[_PAIR_J] - palm[_PAIR_I]


def _vector_operator(palm_h, pairs_h, scale: float):
    """Residual map ``A @ tips - b`` for the baseline vector set.

    Rows of ``A`` pick palm-to-tip vectors for the fingers present in the human
    input and the three tripod tip-to-tip differences.
    """
    use = np.flatnonzero(~np.isnan(palm_h[:, 0]))
    A = np.zeros((len(use) + len(_PAIR_I), len(FINGER_NAMES)))
    A[np.arange(len(use)), use] = 1.0
    rows = len(use) + np.arange(len(_PAIR_I))
    A[rows, _PAIR_J] += 1.0
    A[rows, _PAIR_I] -= 1.0
    b = scale * np.vstack([palm_h[use], pairs_h])
    return A, b


def vector_cost(model: HandModel, Q, palm_h, pairs_h, scale: float) -> np.ndarray:
    """Sum of squared differences between scaled human and robot vectors."""
    A, b = _vector_operator(palm_h, pairs_h, scale)
    r = A @ model.tip_positions(np.atleast_2d(Q)) - b  # robot palm origin is the frame origin
    return np.einsum("bij,bij->b", r, r)


def vector_retarget(human_tips_in_palm: Mapping[str, np.ndarray], palm_origin, model: HandModel,
                    q_prev, cfg: VectorRetargetConfig = VectorRetargetConfig()) -> RetargetOutput:
    """Match scaled human palm-to-tip and tip-to-tip vectors on all joints."""
    q_prev = clamp_to_limits(model, q_prev)
    palm_h, pairs_h = human_vectors(human_tips_in_palm, palm_origin)
    if not all(f in human_tips_in_palm for f in TRIPOD_FINGERS) or not np.all(np.isfinite(pairs_h)):
        return RetargetOutput(q_prev, None, 0)
    A, b = _vector_operator(palm_h, pairs_h, cfg.scale)

    def cost(Q):
        r = A @ model.tip_positions(Q) - b
        return np.einsum("bij,bij->b", r, r)

    q_best, c_best, used = fd_descent(cost, q_prev, range(model.n_dof), model.lower, model.upper,
                                      cfg.iterations, cfg.fd_step, cfg.step_size, cfg.per_iter_clip)
    return RetargetOutput(q_best, None, used, c_best)


@dataclass
class StepResult:
    output: RetargetOutput
    q_init: np.ndarray  # vector-retargeted initialization
    theta_r: float  # turn angle of q_cmd since this episode's latch (nan when inactive)
    theta_target: float  # refinement target relative to the latch (nan when inactive)
    axis: Optional[np.ndarray]  # robot tripod normal at q_cmd
    activated: bool = False
    fallback: bool = False


@dataclass
class RetargetSession:
    """Per-trajectory retargeting state (single owner).

    ``method`` is ``"dextwist"`` (vector initialization plus refinement while
    the pinch is active) or ``"vector"`` (baseline only).  Both methods latch
    the same robot tripod reference at activation so their turn angles are
    measured identically.
    """

    model: HandModel
    method: str = "dextwist"
    refine_cfg: RefineConfig = field(default_factory=RefineConfig)
    vector_cfg: VectorRetargetConfig = field(default_factory=VectorRetargetConfig)
    q_prev: Optional[np.ndarray] = None
    ref: Optional[TripodReference] = None
    theta_task_at_latch: float = 0.0
    axis_prev: Optional[np.ndarray] = None
    was_active: bool = False

    def __post_init__(self):
        if self.method not in ("dextwist", "vector"):
            raise ConfigInvalid(f"unknown method {self.method!r}")
        if self.q_prev is None:
            self.q_prev = clamp_to_limits(self.model, np.zeros(self.model.n_dof))

    def step(self, human_tips_in_palm, active: bool, theta_task: float,
             palm_origin=(0.0, 0.0, 0.0)) -> StepResult:
        init = vector_retarget(human_tips_in_palm, palm_origin, self.model, self.q_prev, self.vector_cfg)
        result = StepResult(init, init.q_cmd, float("nan"), float("nan"), None)
        if not active:
            self.ref, self.axis_prev, self.was_active = None, None, False
            self.q_prev = init.q_cmd
            return result
        if not self.was_active or self.ref is None:
            try:
                state = compute_tripod_state(self.model, init.q_cmd, None)
            except DegenerateTripod:
                self.q_prev = init.q_cmd
                result.fallback = True
                return result
            self.ref = latch_reference(state)
            self.theta_task_at_latch = theta_task
            self.axis_prev = state.normal
            self.was_active = True
            result.activated = True
        target = theta_task - self.theta_task_at_latch
        result.theta_target = target
        out = init
        if self.method == "dextwist":
            try:
                align = compute_tripod_state(self.model, init.q_cmd, self.axis_prev).normal
                out = refine(self.model, init.q_cmd, self.ref, target, self.refine_cfg, align)
            except GeometryError:
                result.fallback = True
        try:
            state = compute_tripod_state(self.model, out.q_cmd, self.axis_prev)
            result.theta_r = robot_turn_angle(state, self.ref)
            result.axis = state.normal
            self.axis_prev = state.normal
        except GeometryError:
            result.fallback = True
        result.output = out
        self.q_prev = out.q_cmd
        return result
