"""Pinhole camera model.

Camera space is right-handed with the camera looking down -z; the rotation
quaternion maps camera axes into world axes (identity looks along world -z).
Pixel (i, j) is sampled at its center (i + 0.5, j + 0.5); u runs along width,
v down the height.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..geometry import Quat, Vec3


@dataclass(frozen=True)
class Camera:
    position: Vec3
    rotation: Quat
    fov_y: float  # radians
    width: int
    height: int
    near: float = 0.1
    far: float = 100.0

    def validate(self) -> None:
        if not (0.0 < self.fov_y < math.pi):
            raise ValueError(f"fov_y must be in (0, pi), got {self.fov_y}")
        if not self.near > 0:
            raise ValueError("near must be > 0")
        if not self.far > self.near:
            raise ValueError("far must exceed near")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image dimensions must be positive")

    @property
    def focal_px(self) -> float:
        return (self.height / 2.0) / math.tan(self.fov_y / 2.0)

    def world_to_camera(self) -> tuple[np.ndarray, np.ndarray]:
        """(R, t) such that p_cam = R @ p_world + t."""
        r = self.rotation.conjugate().to_matrix()
        t = -(r @ self.position.to_array())
        return r, t

    def project(self, p_cam: np.ndarray) -> tuple[float, float, float]:
        """Camera-space point -> (u, v, depth); depth is -z in meters."""
        depth = -p_cam[2]
        f = self.focal_px
        u = self.width / 2.0 + f * p_cam[0] / depth
        v = self.height / 2.0 - f * p_cam[1] / depth
        return u, v, depth

    def ray_directions(self) -> np.ndarray:
        """(H, W, 3) unit ray directions in world space through pixel centers."""
        f = self.focal_px
        u = (np.arange(self.width) + 0.5) - self.width / 2.0
        v = self.height / 2.0 - (np.arange(self.height) + 0.5)
        dx, dy = np.meshgrid(u / f, v / f)
        d = np.stack([dx, dy, -np.ones_like(dx)], axis=-1)
        d /= np.linalg.norm(d, axis=-1, keepdims=True)
        return d @ self.rotation.to_matrix().T

    def to_json_dict(self) -> dict:
        return {
            "position": [self.position.x, self.position.y, self.position.z],
            "rotation": [self.rotation.w, self.rotation.x, self.rotation.y, self.rotation.z],
            "fov_y": self.fov_y,
            "width": self.width,
            "height": self.height,
            "near": self.near,
            "far": self.far,
        }

    @staticmethod
    def from_json_dict(d: dict) -> "Camera":
        p = d.get("position", [0.0, 0.0, 0.0])
        r = d.get("rotation", [1.0, 0.0, 0.0, 0.0])
        cam = Camera(
            position=Vec3(*(float(c) for c in p)),
            rotation=Quat(*(float(c) for c in r)).normalized(),
            fov_y=float(d.get("fov_y", math.pi / 3.0)),
            width=int(d.get("width", 512)),
            height=int(d.get("height", 512)),
            near=float(d.get("near", 0.1)),
            far=float(d.get("far", 100.0)),
        )
        cam.validate()
        return cam


DEFAULT_SNAPSHOT_SIZE = 512
DEFAULT_FOV_Y = math.pi / 3.0
