"""Serial-chain kinematic model of a four-finger robot hand.

Each finger is a chain of revolute joints.  A frame advances through joint
``j`` by rotating about ``axis_j`` (expressed in the parent frame) by
``q_j`` and then translating by ``offset_j``; the fingertip is ``tip_offset``
in the last frame.  Forward kinematics is vectorized over leading batch
dimensions of ``q`` because the finite-difference solvers evaluate many
perturbed configurations per step.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Dict, Mapping, Optional, Tuple

import numba
import numpy as np

from .errors import ConfigInvalid
from .se3 import Transform, rpy_to_matrix

FINGER_NAMES = ("thumb", "index", "middle", "ring")
TRIPOD_FINGERS = ("thumb", "index", "middle")


@dataclass(frozen=True)
class Joint:
    axis: np.ndarray
    offset: np.ndarray
    lower: float
    upper: float
    # (finger, joint index) whose angle this joint copies; it owns no DOF
    mimic: Optional[Tuple[str, int]] = None


@dataclass(frozen=True)
class FingerChain:
    base_pose: Transform
    joints: Tuple[Joint, ...]
    tip_offset: np.ndarray


@dataclass(frozen=True, eq=False)
class HandModel:
    fingers: Mapping[str, FingerChain]
    tripod_fingers: Tuple[str, ...] = TRIPOD_FINGERS
    name: str = "hand"
    # derived, filled in __post_init__
    n_dof: int = field(init=False)
    lower: np.ndarray = field(init=False)
    upper: np.ndarray = field(init=False)
    finger_dofs: Dict[str, Tuple[int, ...]] = field(init=False)
    tripod_dofs: Tuple[int, ...] = field(init=False)

    def __post_init__(self):
        missing = [f for f in FINGER_NAMES if f not in self.fingers]
        if missing:
            raise ConfigInvalid(f"hand model is missing fingers: {', '.join(missing)}")
        fingers = {f: self.fingers[f] for f in FINGER_NAMES}
        object.__setattr__(self, "fingers", fingers)

        index_of: Dict[Tuple[str, int], int] = {}
        lower, upper = [], []
        finger_dofs: Dict[str, list] = {f: [] for f in FINGER_NAMES}
        for f in FINGER_NAMES:
            chain = fingers[f]
            if not chain.joints:
                raise ConfigInvalid(f"finger {f!r} has no joints")
            for j, jt in enumerate(chain.joints):
                if not jt.lower < jt.upper:
                    raise ConfigInvalid(f"{f} joint {j}: lower must be < upper")
                if jt.mimic is None:
                    index_of[(f, j)] = len(lower)
                    finger_dofs[f].append(len(lower))
                    lower.append(jt.lower)
                    upper.append(jt.upper)
        n = len(lower)
        jmax = max(len(fingers[f].joints) for f in FINGER_NAMES)
        nf = len(FINGER_NAMES)
        slot = np.full((nf, jmax), n, dtype=np.intp)  # index n reads a padded zero
        axes = np.tile(np.array([0.0, 0.0, 1.0]), (nf, jmax, 1))
        offsets = np.zeros((nf, jmax, 3))
        for i, f in enumerate(FINGER_NAMES):
            for j, jt in enumerate(fingers[f].joints):
                key = (f, j) if jt.mimic is None else tuple(jt.mimic)
                if key not in index_of:
                    raise ConfigInvalid(f"{f} joint {j}: mimic target {jt.mimic} is not an actuated joint")
                slot[i, j] = index_of[key]
                axes[i, j] = jt.axis
                offsets[i, j] = jt.offset
                if jt.mimic is not None and key[0] != f:
                    finger_dofs[f].append(index_of[key])
        object.__setattr__(self, "n_dof", n)
        object.__setattr__(self, "lower", _frozen(lower))
        object.__setattr__(self, "upper", _frozen(upper))
        object.__setattr__(self, "finger_dofs", {f: tuple(v) for f, v in finger_dofs.items()})
        tripod = sorted({d for f in self.tripod_fingers for d in finger_dofs[f]})
        object.__setattr__(self, "tripod_dofs", tuple(tripod))
        object.__setattr__(self, "_kernel_args", (
            slot,
            axes,
            offsets,
            np.stack([fingers[f].base_pose.rotation for f in FINGER_NAMES]),
            np.stack([fingers[f].base_pose.translation for f in FINGER_NAMES]),
            np.stack([fingers[f].tip_offset for f in FINGER_NAMES]),
        ))

    def tip_positions(self, q) -> np.ndarray:
        """Fingertips for ``q`` of shape ``(..., n_dof)`` -> ``(..., 4, 3)``.

        Rows follow ``FINGER_NAMES``.
        """
        q = np.asarray(q, dtype=float)
        if q.ndim == 2 and q.flags.c_contiguous:
            return _fk_kernel(q, *self._kernel_args)
        out = _fk_kernel(np.ascontiguousarray(q.reshape(-1, q.shape[-1])), *self._kernel_args)
        return out.reshape(q.shape[:-1] + out.shape[1:])


@numba.njit(cache=True)
def _fk_kernel(q, slot, axes, offsets, base_R, base_p, tip):
    nb, n_dof = q.shape
    nf, nj = slot.shape
    out = np.empty((nb, nf, 3))
    for b in range(nb):
        for f in range(nf):
            r00, r01, r02 = base_R[f, 0, 0], base_R[f, 0, 1], base_R[f, 0, 2]
            r10, r11, r12 = base_R[f, 1, 0], base_R[f, 1, 1], base_R[f, 1, 2]
            r20, r21, r22 = base_R[f, 2, 0], base_R[f, 2, 1], base_R[f, 2, 2]
            p0, p1, p2 = base_p[f, 0], base_p[f, 1], base_p[f, 2]
            for j in range(nj):
                k = slot[f, j]
                th = q[b, k] if k < n_dof else 0.0
                x, y, z = axes[f, j, 0], axes[f, j, 1], axes[f, j, 2]
                c = np.cos(th)
                s = np.sin(th)
                C = 1.0 - c
                # Rodrigues rotation about the joint axis
                a00, a01, a02 = c + x * x * C, x * y * C - z * s, x * z * C + y * s
                a10, a11, a12 = y * x * C + z * s, c + y * y * C, y * z * C - x * s
                a20, a21, a22 = z * x * C - y * s, z * y * C + x * s, c + z * z * C
                r00, r01, r02 = (r00 * a00 + r01 * a10 + r02 * a20, r00 * a01 + r01 * a11 + r02 * a21,
                                 r00 * a02 + r01 * a12 + r02 * a22)
                r10, r11, r12 = (r10 * a00 + r11 * a10 + r12 * a20, r10 * a01 + r11 * a11 + r12 * a21,
                                 r10 * a02 + r11 * a12 + r12 * a22)
                r20, r21, r22 = (r20 * a00 + r21 * a10 + r22 * a20, r20 * a01 + r21 * a11 + r22 * a21,
                                 r20 * a02 + r21 * a12 + r22 * a22)
                ox, oy, oz = offsets[f, j, 0], offsets[f, j, 1], offsets[f, j, 2]
                p0 += r00 * ox + r01 * oy + r02 * oz
                p1 += r10 * ox + r11 * oy + r12 * oz
                p2 += r20 * ox + r21 * oy + r22 * oz
            tx, ty, tz = tip[f, 0], tip[f, 1], tip[f, 2]
            out[b, f, 0] = p0 + r00 * tx + r01 * ty + r02 * tz
            out[b, f, 1] = p1 + r10 * tx + r11 * ty + r12 * tz
            out[b, f, 2] = p2 + r20 * tx + r21 * ty + r22 * tz
    return out


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.flags.writeable = False
    return arr


def fk_fingertips(model: HandModel, q) -> Dict[str, np.ndarray]:
    q = np.asarray(q, dtype=float)
    if q.shape != (model.n_dof,):
        raise ValueError(f"expected {model.n_dof} joint values, got shape {q.shape}")
    tips = model.tip_positions(q)
    return {f: tips[i] for i, f in enumerate(FINGER_NAMES)}


def clamp_to_limits(model: HandModel, q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape[-1] != model.n_dof:
        raise ValueError(f"expected {model.n_dof} joint values")
    return np.clip(q, model.lower, model.upper)


def _vec3(value, what: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise ConfigInvalid(f"{what} must be a list of 3 finite numbers")
    return arr


def model_from_dict(data: Mapping, name: str = "hand") -> HandModel:
    """Build and validate a model from the parameter-file structure."""
    if not isinstance(data, Mapping) or not isinstance(data.get("fingers"), Mapping):
        raise ConfigInvalid("hand parameter file needs a top-level 'fingers' map")
    fingers = {}
    for fname, fd in data["fingers"].items():
        if fname not in FINGER_NAMES:
            raise ConfigInvalid(f"unknown finger {fname!r}")
        try:
            base = Transform(rpy_to_matrix(*_vec3(fd["base_rotation_rpy"], f"{fname}.base_rotation_rpy")),
                             _vec3(fd["base_position"], f"{fname}.base_position"))
            joints = []
            for j, jd in enumerate(fd["joints"]):
                axis = _vec3(jd["axis"], f"{fname}.joints[{j}].axis")
                norm = np.linalg.norm(axis)
                if abs(norm - 1.0) > 1e-6:
                    raise ConfigInvalid(f"{fname}.joints[{j}].axis must be unit length")
                mimic = jd.get("mimic")
                joints.append(Joint(axis / norm, _vec3(jd["offset"], f"{fname}.joints[{j}].offset"),
                                    float(jd["lower"]), float(jd["upper"]),
                                    None if mimic is None else (str(mimic[0]), int(mimic[1]))))
            tip = _vec3(fd["tip_offset"], f"{fname}.tip_offset")
        except (KeyError, TypeError) as exc:
            raise ConfigInvalid(f"finger {fname!r}: malformed entry ({exc})") from exc
        fingers[fname] = FingerChain(base, tuple(joints), tip)
    return HandModel(fingers, name=str(data.get("name", name)))


def load_hand_model(path) -> HandModel:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"cannot read hand parameter file {path}: {exc}") from exc
    return model_from_dict(data, name=path.stem)


@lru_cache(maxsize=1)
def default_model() -> HandModel:
    """The bundled 16-DOF anthropomorphic hand (``data/default_hand.json``)."""
    text = resources.files("twist_retarget").joinpath("data/default_hand.json").read_text()
    return model_from_dict(json.loads(text), name="default_hand")


def default_model_path() -> Path:
    return Path(str(resources.files("twist_retarget").joinpath("data/default_hand.json")))
