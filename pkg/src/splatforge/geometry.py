"""Small value types for 3D math: vectors, quaternions, TRS transforms, boxes.

Quaternions are scalar-first (w, x, y, z) and kept unit-norm. Transforms are
translation + rotation + uniform scale; non-uniform scale is deliberately
unsupported because it does not compose with rotated Gaussian covariances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

QUAT_NORM_TOL = 1e-5


class NonPositiveScale(ValueError):
    """Transform scale must be strictly positive."""


@dataclass(frozen=True)
class Vec3:
    x: float
    y: float
    z: float

    def to_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)

    @staticmethod
    def from_array(a) -> "Vec3":
        return Vec3(float(a[0]), float(a[1]), float(a[2]))

    def is_finite(self) -> bool:
        return all(math.isfinite(c) for c in (self.x, self.y, self.z))


@dataclass(frozen=True)
class Quat:
    """Unit quaternion, scalar-first."""

    w: float
    x: float
    y: float
    z: float

    def to_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z], dtype=np.float64)

    @staticmethod
    def from_array(a) -> "Quat":
        return Quat(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    @staticmethod
    def identity() -> "Quat":
        return Quat(1.0, 0.0, 0.0, 0.0)

    def norm(self) -> float:
        return math.sqrt(self.w**2 + self.x**2 + self.y**2 + self.z**2)

    def normalized(self) -> "Quat":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize zero quaternion")
        return Quat(self.w / n, self.x / n, self.y / n, self.z / n)

    def conjugate(self) -> "Quat":
        return Quat(self.w, -self.x, -self.y, -self.z)

    def __matmul__(self, other: "Quat") -> "Quat":
        """Hamilton product; (a @ b) rotates by b then a."""
        aw, ax, ay, az = self.w, self.x, self.y, self.z
        bw, bx, by, bz = other.w, other.x, other.y, other.z
        return Quat(
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        )

    def rotate(self, v: Vec3) -> Vec3:
        return Vec3.from_array(self.to_matrix() @ v.to_array())

    def to_matrix(self) -> np.ndarray:
        """3x3 rotation matrix (assumes unit norm)."""
        return quat_to_matrix(self.to_array())

    @staticmethod
    def from_axis_angle(axis: Vec3, angle_rad: float) -> "Quat":
        a = axis.to_array()
        n = np.linalg.norm(a)
        if n == 0.0:
            raise ValueError("zero rotation axis")
        a = a / n
        half = angle_rad / 2.0
        s = math.sin(half)
        return Quat(math.cos(half), a[0] * s, a[1] * s, a[2] * s)


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ],
        dtype=np.float64,
    )


def matrix_to_quat(m: np.ndarray) -> Quat:
    """Shepperd's method; returns the unit quaternion with w >= 0."""
    t = np.trace(m)
    if t > 0:
        s = math.sqrt(t + 1.0) * 2
        w = 0.25 * s
        x = (m[2, 1] - m[1, 2]) / s
        y = (m[0, 2] - m[2, 0]) / s
        z = (m[1, 0] - m[0, 1]) / s
    elif m[0, 0] > m[1, 1] and m[0, 0] > m[2, 2]:
        s = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2
        w = (m[2, 1] - m[1, 2]) / s
        x = 0.25 * s
        y = (m[0, 1] + m[1, 0]) / s
        z = (m[0, 2] + m[2, 0]) / s
    elif m[1, 1] > m[2, 2]:
        s = math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2
        w = (m[0, 2] - m[2, 0]) / s
        x = (m[0, 1] + m[1, 0]) / s
        y = 0.25 * s
        z = (m[1, 2] + m[2, 1]) / s
    else:
        s = math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2
        w = (m[1, 0] - m[0, 1]) / s
        x = (m[0, 2] + m[2, 0]) / s
        y = (m[1, 2] + m[2, 1]) / s
        z = 0.25 * s
    q = Quat(w, x, y, z).normalized()
    if q.w < 0:
        q = Quat(-q.w, -q.x, -q.y, -q.z)
    return q


def quat_multiply_arrays(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product on (N, 4) arrays of scalar-first quaternions."""
    aw, ax, ay, az = a[:, 0], a[:, 1], a[:, 2], a[:, 3]
    bw, bx, by, bz = b[:, 0], b[:, 1], b[:, 2], b[:, 3]
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=1,
    )


def quats_to_matrices(q: np.ndarray) -> np.ndarray:
    """(N, 4) scalar-first quaternions -> (N, 3, 3) rotation matrices."""
    w, x, y, z = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    m = np.empty((q.shape[0], 3, 3), dtype=np.float64)
    m[:, 0, 0] = 1 - 2 * (y * y + z * z)
    m[:, 0, 1] = 2 * (x * y - w * z)
    m[:, 0, 2] = 2 * (x * z + w * y)
    m[:, 1, 0] = 2 * (x * y + w * z)
    m[:, 1, 1] = 1 - 2 * (x * x + z * z)
    m[:, 1, 2] = 2 * (y * z - w * x)
    m[:, 2, 0] = 2 * (x * z - w * y)
    m[:, 2, 1] = 2 * (y * z + w * x)
    m[:, 2, 2] = 1 - 2 * (x * x + y * y)
    return m


@dataclass(frozen=True)
class TransformTRS:
    """Translation, rotation, uniform scale (applied scale -> rotate -> translate)."""

    translation: Vec3
    rotation: Quat
    scale: float = 1.0

    @staticmethod
    def identity() -> "TransformTRS":
        return TransformTRS(Vec3(0.0, 0.0, 0.0), Quat.identity(), 1.0)

    def validate(self) -> None:
        if not self.scale > 0:
            raise NonPositiveScale(f"scale must be > 0, got {self.scale}")
        if abs(self.rotation.norm() - 1.0) > QUAT_NORM_TOL:
            raise ValueError("rotation quaternion is not unit-norm")

    def apply_point(self, p: Vec3) -> Vec3:
        r = self.rotation.to_matrix() @ p.to_array()
        return Vec3.from_array(self.scale * r + self.translation.to_array())

    def compose(self, inner: "TransformTRS") -> "TransformTRS":
        """Transform equal to applying `inner` first, then `self`."""
        rot = (self.rotation @ inner.rotation).normalized()
        t = self.apply_point(inner.translation)
        return TransformTRS(t, rot, self.scale * inner.scale)

    def inverse(self) -> "TransformTRS":
        inv_rot = self.rotation.conjugate()
        inv_scale = 1.0 / self.scale
        t = inv_rot.to_matrix() @ (-self.translation.to_array()) * inv_scale
        return TransformTRS(Vec3.from_array(t), inv_rot, inv_scale)


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned box with closed bounds; min <= max componentwise."""

    min: Vec3
    max: Vec3

    def validate(self) -> None:
        if self.min.x > self.max.x or self.min.y > self.max.y or self.min.z > self.max.z:
            raise ValueError("Aabb min must be <= max componentwise")

    def contains(self, p: Vec3) -> bool:
        return (
            self.min.x <= p.x <= self.max.x
            and self.min.y <= p.y <= self.max.y
            and self.min.z <= p.z <= self.max.z
        )

    def corners(self) -> np.ndarray:
        xs = (self.min.x, self.max.x)
        ys = (self.min.y, self.max.y)
        zs = (self.min.z, self.max.z)
        return np.array([[x, y, z] for x in xs for y in ys for z in zs], dtype=np.float64)

    def center(self) -> Vec3:
        return Vec3(
            (self.min.x + self.max.x) / 2.0,
            (self.min.y + self.max.y) / 2.0,
            (self.min.z + self.max.z) / 2.0,
        )

    @staticmethod
    def of_points(points: np.ndarray) -> "Aabb":
        if len(points) == 0:
            return Aabb(Vec3(0.0, 0.0, 0.0), Vec3(0.0, 0.0, 0.0))
        lo = points.min(axis=0)
        hi = points.max(axis=0)
        return Aabb(Vec3.from_array(lo), Vec3.from_array(hi))

    def transformed(self, t: TransformTRS) -> "Aabb":
        """Bounding box of the transformed corners."""
        m = t.rotation.to_matrix()
        pts = (t.scale * (self.corners() @ m.T)) + t.translation.to_array()
        return Aabb.of_points(pts)


def look_at(position: Vec3, target: Vec3, up: Vec3 = Vec3(0.0, 1.0, 0.0)) -> Quat:
    """Camera-to-world rotation looking from position toward target (-z forward)."""
    f = target.to_array() - position.to_array()
    fn = np.linalg.norm(f)
    if fn == 0.0:
        raise ValueError("look_at target coincides with position")
    f = f / fn
    u = up.to_array()
    r = np.cross(f, u)
    if np.linalg.norm(r) < 1e-8:
        r = np.cross(f, np.array([0.0, 0.0, 1.0]))
    r = r / np.linalg.norm(r)
    u = np.cross(r, f)
    m = np.stack([r, u, -f], axis=1)
    return matrix_to_quat(m)
