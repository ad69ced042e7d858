"""Rigid-motion primitives: unit vectors, SO(3) exp/log, rigid transforms.

Vectors are plain ``numpy`` arrays of shape ``(3,)`` and rotations are
``(3, 3)`` arrays.  ``so3_exp`` and ``so3_log`` also accept leading batch
dimensions, which the solvers use to evaluate many configurations at once.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateVector, NearPiRotation, NotARotation

EPS_LEN = 1e-9  # m
EPS_LOG = 1e-6  # rad


def unit(v, eps: float = EPS_LEN) -> np.ndarray:
    """Return ``v / |v|``; raise DegenerateVector when ``|v| <= eps``."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if not n > eps:
        raise DegenerateVector(f"vector norm {n:.3g} below {eps:g}")
    return v / n


def hat(w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    out = np.zeros(w.shape[:-1] + (3, 3))
    out[..., 0, 1] = -w[..., 2]
    out[..., 0, 2] = w[..., 1]
    out[..., 1, 0] = w[..., 2]
    out[..., 1, 2] = -w[..., 0]
    out[..., 2, 0] = -w[..., 1]
    out[..., 2, 1] = w[..., 0]
    return out


def vee(W) -> np.ndarray:
    W = np.asarray(W, dtype=float)
    return W[..., [2, 0, 1], [1, 2, 0]]


def so3_exp(w) -> np.ndarray:
    """Rodrigues formula.  ``w`` is a rotation vector, angle ``|w| < pi``."""
    w = np.asarray(w, dtype=float)
    theta = np.linalg.norm(w, axis=-1)[..., None, None]
    K = hat(w)
    small = theta < 1e-6
    t2 = theta * theta
    # series expansions below 1e-6 rad keep full precision
    a = np.where(small, 1.0 - t2 / 6.0, np.sin(theta) / np.where(small, 1.0, theta))
    b = np.where(small, 0.5 - t2 / 24.0, (1.0 - np.cos(theta)) / np.where(small, 1.0, t2))
    return np.eye(3) + a * K + b * (K @ K)


def so3_log(R) -> np.ndarray:
    """Rotation vector ``theta * axis`` of ``R``.

    Raises NearPiRotation when the angle is within ``EPS_LOG`` of pi, where the
    axis sign is ambiguous.
    """
    R = np.asarray(R, dtype=float)
    s_vec = 0.5 * (R[..., [2, 0, 1], [1, 2, 0]] - R[..., [1, 2, 0], [2, 0, 1]])  # sin(theta) * axis
    s = np.sqrt(np.einsum("...i,...i->...", s_vec, s_vec))
    c = 0.5 * (R[..., 0, 0] + R[..., 1, 1] + R[..., 2, 2] - 1.0)
    theta = np.arctan2(s, c)
    if np.any(theta >= np.pi - EPS_LOG):
        raise NearPiRotation(f"rotation angle {np.max(theta):.9f} too close to pi")
    small = s < 1e-8
    scale = np.where(small, 1.0 + s * s / 6.0, theta / np.where(small, 1.0, s))
    return scale[..., None] * s_vec


def rotation_about(axis, angle: float) -> np.ndarray:
    return so3_exp(unit(axis) * angle)


def is_rotation(R, tol: float = 1e-8) -> bool:
    R = np.asarray(R, dtype=float)
    return bool(
        R.shape == (3, 3)
        and np.all(np.isfinite(R))
        and np.allclose(R.T @ R, np.eye(3), atol=tol, rtol=0.0)
        and abs(np.linalg.det(R) - 1.0) <= tol
    )


def reorthonormalize(R) -> np.ndarray:
    """Project a nearly orthonormal matrix back onto SO(3) (Gram-Schmidt)."""
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3) or not np.all(np.isfinite(R)):
        raise NotARotation("expected a finite 3x3 matrix")
    if np.linalg.norm(R.T @ R - np.eye(3)) >= 0.1:
        raise NotARotation("matrix too far from orthonormal to project")
    x = R[:, 0] / np.linalg.norm(R[:, 0])
    y = R[:, 1] - (x @ R[:, 1]) * x
    y /= np.linalg.norm(y)
    z = R[:, 2] - (x @ R[:, 2]) * x - (y @ R[:, 2]) * y
    z /= np.linalg.norm(z)
    out = np.column_stack([x, y, z])
    if np.linalg.det(out) < 0.0:
        raise NotARotation("projection is a reflection (det -1)")
    return out


def rpy_to_matrix(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """Fixed-axis roll-pitch-yaw, ``Rz(yaw) @ Ry(pitch) @ Rx(roll)``."""
    cr, sr = np.cos(roll), np.sin(roll)
    cp, sp = np.cos(pitch), np.sin(pitch)
    cy, sy = np.cos(yaw), np.sin(yaw)
    Rx = np.array([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
    Ry = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
    Rz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]])
    return Rz @ Ry @ Rx


@dataclass(frozen=True)
class Transform:
    """Rigid transform ``x -> rotation @ x + translation``."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        R = np.array(self.rotation, dtype=float)
        p = np.array(self.translation, dtype=float).reshape(3)
        if not is_rotation(R):
            raise NotARotation("transform rotation is not in SO(3)")
        if not np.all(np.isfinite(p)):
            raise ValueError("transform translation must be finite")
        R.flags.writeable = False
        p.flags.writeable = False
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", p)

    @classmethod
    def identity(cls) -> "Transform":
        return cls()

    @classmethod
    def from_matrix(cls, T) -> "Transform":
        T = np.asarray(T, dtype=float)
        return cls(T[:3, :3], T[:3, 3])

    def matrix(self) -> np.ndarray:
        T = np.eye(4)
        T[:3, :3] = self.rotation
        T[:3, 3] = self.translation
        return T

    def __matmul__(self, other: "Transform") -> "Transform":
        R = self.rotation @ other.rotation
        if not is_rotation(R):
            R = reorthonormalize(R)
        return Transform(R, self.rotation @ other.translation + self.translation)

    def inverse(self) -> "Transform":
        Rt = self.rotation.T
        return Transform(Rt, -Rt @ self.translation)

    def apply(self, points) -> np.ndarray:
        """Map points of shape ``(..., 3)``."""
        return np.asarray(points, dtype=float) @ self.rotation.T + self.translation
