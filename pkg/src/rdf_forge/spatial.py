"""Rigid-body transform algebra, RPY conversion, and inertia-tensor algebra.

Rotations are stored as 3x3 orthonormal matrices everywhere in this package;
roll/pitch/yaw (fixed-axis X, then Y, then Z -- the URDF ``rpy`` convention)
appears only when reading or writing description files.  All values are
immutable after construction and safe to share between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

# Tolerances used across the package, fixed in one place.
ORTHONORMALITY_TOL = 1e-9
ROUNDTRIP_TOL = 1e-12
UNIT_AXIS_TOL = 1e-9
GIMBAL_LOCK_TOL = 1e-9
PSD_TOL = 1e-12
TRIANGLE_TOL = 1e-9


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


def check_rotation(r, tol: float = ORTHONORMALITY_TOL) -> np.ndarray:
    """Validate that ``r`` is a proper rotation matrix and return it as float64."""
    r = np.asarray(r, dtype=np.float64)
    if r.shape != (3, 3):
        raise ValueError(f"rotation must be 3x3, got shape {r.shape}")
    err = float(np.abs(r @ r.T - np.eye(3)).max())
    if err > tol:
        raise ValueError(f"rotation is not orthonormal (max deviation {err:.3e})")
    det = float(np.linalg.det(r))
    if abs(det - 1.0) > tol:
        raise ValueError(f"rotation determinant must be +1, got {det}")
    return r


def unit_axis(v, tol: float = UNIT_AXIS_TOL) -> np.ndarray:
    """Validate that ``v`` is a unit 3-vector and return a read-only copy."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (3,):
        raise ValueError(f"axis must be a 3-vector, got shape {v.shape}")
    n = float(np.linalg.norm(v))
    if abs(n - 1.0) > tol:
        raise ValueError(f"axis must have unit norm, got {n}")
    return _frozen(v)


def normalize_axis(v) -> np.ndarray:
    """Scale a nonzero 3-vector to unit length."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (3,):
        raise ValueError(f"axis must be a 3-vector, got shape {v.shape}")
    n = float(np.linalg.norm(v))
    if n < 1e-12:
        raise ValueError("axis has (near-)zero norm and no direction")
    return _frozen(v / n)


@dataclass(frozen=True, eq=False)
class Transform:
    """Rigid-body pose: a 3x3 rotation plus a translation in meters."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = check_rotation(self.rotation)
        t = np.asarray(self.translation, dtype=np.float64)
        if t.shape != (3,):
            raise ValueError(f"translation must be a 3-vector, got shape {t.shape}")
        if not np.all(np.isfinite(t)):
            raise ValueError("translation must be finite")
        object.__setattr__(self, "rotation", _frozen(r))
        object.__setattr__(self, "translation", _frozen(t))

    @staticmethod
    def identity() -> "Transform":
        return Transform(np.eye(3), np.zeros(3))

    def apply(self, points) -> np.ndarray:
        """Map points of shape (..., 3) from this frame into the parent frame."""
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.rotation.T + self.translation

    def matrix(self) -> np.ndarray:
        """4x4 homogeneous matrix form."""
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    @staticmethod
    def from_matrix(m) -> "Transform":
        m = np.asarray(m, dtype=np.float64)
        if m.shape != (4, 4):
            raise ValueError(f"expected 4x4 homogeneous matrix, got {m.shape}")
        return Transform(m[:3, :3], m[:3, 3])

    def allclose(self, other: "Transform", tol: float = ROUNDTRIP_TOL) -> bool:
        return bool(
            np.abs(self.rotation - other.rotation).max() <= tol
            and np.abs(self.translation - other.translation).max() <= tol
        )

    def is_identity(self, tol: float = ROUNDTRIP_TOL) -> bool:
        return self.allclose(Transform.identity(), tol)

    def __repr__(self):
        t = ", ".join(f"{v:.6g}" for v in self.translation)
        return f"Transform(t=[{t}], R={self.rotation.tolist()})"


def translate(x: float, y: float, z: float) -> Transform:
    return Transform(np.eye(3), np.array([x, y, z], dtype=np.float64))


def rotate(rotation) -> Transform:
    return Transform(rotation, np.zeros(3))


def rot_x(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def compose(a: Transform, b: Transform) -> Transform:
    """Chain two poses: apply ``b`` first, then ``a``."""
    return Transform(a.rotation @ b.rotation, a.rotation @ b.translation + a.translation)


def inverse(t: Transform) -> Transform:
    rt = t.rotation.T
    return Transform(rt, -(rt @ t.translation))


def relative(world_a: Transform, world_b: Transform) -> Transform:
    """Pose of frame ``b`` expressed in frame ``a``, both given in a common frame."""
    return compose(inverse(world_a), world_b)


class Rpy(NamedTuple):
    """Fixed-axis X-Y-Z angles in radians (the URDF origin convention)."""

    roll: float
    pitch: float
    yaw: float


def _canonical(angle: float) -> float:
    # atan2 may return exactly -pi; the canonical range is (-pi, pi].
    return math.pi if angle == -math.pi else angle


def rpy_to_rot(rpy) -> np.ndarray:
    """Rotation matrix Rz(yaw) @ Ry(pitch) @ Rx(roll)."""
    roll, pitch, yaw = (float(a) for a in rpy)
    if not all(math.isfinite(a) for a in (roll, pitch, yaw)):
        raise ValueError("rpy angles must be finite")
    return rot_z(yaw) @ rot_y(pitch) @ rot_x(roll)


def rot_to_rpy(r) -> Rpy:
    """Recover fixed-axis X-Y-Z angles from a rotation matrix.

    At gimbal lock (cos(pitch) below GIMBAL_LOCK_TOL) roll is fixed to zero
    and yaw absorbs the remaining rotation, so output is deterministic.
    """
    r = check_rotation(r)
    cp = math.hypot(r[2, 1], r[2, 2])
    if cp < GIMBAL_LOCK_TOL:
        pitch = math.copysign(math.pi / 2.0, -r[2, 0])
        roll = 0.0
        yaw = _canonical(math.atan2(-r[0, 1], r[1, 1]))
    else:
        pitch = math.atan2(-r[2, 0], cp)
        roll = _canonical(math.atan2(r[2, 1], r[2, 2]))
        yaw = _canonical(math.atan2(r[1, 0], r[0, 0]))
    return Rpy(roll, pitch, yaw)


@dataclass(frozen=True)
class InertiaTensor:
    """Symmetric 3x3 inertia (kg m^2) stored as its six independent entries."""

    ixx: float
    iyy: float
    izz: float
    ixy: float = 0.0
    ixz: float = 0.0
    iyz: float = 0.0

    def __post_init__(self):
        for name in ("ixx", "iyy", "izz", "ixy", "ixz", "iyz"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"inertia component {name} must be finite")
            object.__setattr__(self, name, v)

    def matrix(self) -> np.ndarray:
        return np.array(
            [
                [self.ixx, self.ixy, self.ixz],
                [self.ixy, self.iyy, self.iyz],
                [self.ixz, self.iyz, self.izz],
            ]
        )

    @staticmethod
    def from_matrix(m, symmetry_tol: float = 1e-9) -> "InertiaTensor":
        m = np.asarray(m, dtype=np.float64)
        if m.shape != (3, 3):
            raise ValueError(f"inertia must be 3x3, got {m.shape}")
        skew = float(np.abs(m - m.T).max())
        scale = max(1.0, float(np.abs(m).max()))
        if skew > symmetry_tol * scale:
            raise ValueError(f"inertia matrix is not symmetric (max asymmetry {skew:.3e})")
        m = 0.5 * (m + m.T)
        return InertiaTensor(m[0, 0], m[1, 1], m[2, 2], m[0, 1], m[0, 2], m[1, 2])

    @staticmethod
    def diagonal(ixx: float, iyy: float, izz: float) -> "InertiaTensor":
        return InertiaTensor(ixx, iyy, izz)

    @staticmethod
    def zero() -> "InertiaTensor":
        return InertiaTensor(0.0, 0.0, 0.0)

    def principal_moments(self) -> np.ndarray:
        """Eigenvalues in ascending order."""
        return np.linalg.eigvalsh(self.matrix())

    def is_physical(self, psd_tol: float = PSD_TOL, triangle_tol: float = TRIANGLE_TOL) -> bool:
        """Positive semidefinite and principal moments satisfy the triangle inequality."""
        lam = self.principal_moments()
        if lam[0] < -psd_tol:
            return False
        return bool(lam[0] + lam[1] >= lam[2] - triangle_tol)


def rotate_inertia(i: InertiaTensor, r) -> InertiaTensor:
    """Re-express an inertia tensor under a rotation of axes: R I R^T."""
    r = check_rotation(r)
    m = r @ i.matrix() @ r.T
    return InertiaTensor.from_matrix(0.5 * (m + m.T), symmetry_tol=np.inf)


def parallel_axis(i_com: InertiaTensor, mass: float, d) -> InertiaTensor:
    """Shift an inertia taken about the center of mass by displacement ``d``."""
    mass = float(mass)
    if mass < 0.0:
        raise ValueError(f"mass must be non-negative, got {mass}")
    d = np.asarray(d, dtype=np.float64)
    if d.shape != (3,):
        raise ValueError(f"displacement must be a 3-vector, got shape {d.shape}")
    shift = mass * (float(d @ d) * np.eye(3) - np.outer(d, d))
    return InertiaTensor.from_matrix(i_com.matrix() + shift, symmetry_tol=np.inf)
