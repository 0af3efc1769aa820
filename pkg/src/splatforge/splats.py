"""Gaussian-splat data model and covariance-correct transform algebra.

A cloud stores per-splat parameters in float32 arrays (the PLY interchange
precision); math that needs headroom widens to float64 internally. Scales are
natural logs of per-axis standard deviations and opacity is a logit, matching
the trained-splat export convention so ingestion is lossless.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (
    Aabb,
    NonPositiveScale,
    Quat,
    TransformTRS,
    Vec3,
    quat_multiply_arrays,
    quats_to_matrices,
)

# Zeroth-order spherical harmonic basis constant, 1 / (2 * sqrt(pi)).
SH_C0 = 0.28209479177387814

SH_REST_MAX = 45
_REST_COUNT_BY_DEGREE = {0: 0, 1: 9, 2: 24, 3: 45}
_DEGREE_BY_REST_COUNT = {v: k for k, v in _REST_COUNT_BY_DEGREE.items()}


def sh_rest_count(sh_degree: int) -> int:
    return _REST_COUNT_BY_DEGREE[sh_degree]


def sh_degree_for_rest_count(count: int) -> int:
    if count not in _DEGREE_BY_REST_COUNT:
        raise ValueError(f"unsupported f_rest coefficient count {count}")
    return _DEGREE_BY_REST_COUNT[count]


@dataclass(frozen=True)
class GaussianSplat:
    """One Gaussian primitive, as plain values."""

    position: Vec3
    rotation: Quat
    log_scale: Vec3
    opacity_logit: float
    color_dc: tuple[float, float, float]
    sh_rest: tuple[float, ...] = (0.0,) * SH_REST_MAX

    def decoded_color(self) -> np.ndarray:
        """DC-only RGB in [0, 1]."""
        c = 0.5 + SH_C0 * np.array(self.color_dc, dtype=np.float64)
        return np.clip(c, 0.0, 1.0)


@dataclass
class SplatCloud:
    """Ordered collection of splats, array-of-structs style.

    Arrays are float32 and treated as immutable; operations return new clouds.
    ``sh_rest`` always has 45 columns, zero beyond the count implied by
    ``sh_degree`` (0, 9, 24 or 45 coefficients).
    """

    positions: np.ndarray  # (N, 3) float32
    rotations: np.ndarray  # (N, 4) float32, scalar-first, unit
    log_scales: np.ndarray  # (N, 3) float32
    opacity_logits: np.ndarray  # (N,) float32
    colors_dc: np.ndarray  # (N, 3) float32
    sh_rest: np.ndarray  # (N, 45) float32
    sh_degree: int = 0

    @staticmethod
    def empty(sh_degree: int = 0) -> "SplatCloud":
        return SplatCloud(
            positions=np.zeros((0, 3), dtype=np.float32),
            rotations=np.zeros((0, 4), dtype=np.float32),
            log_scales=np.zeros((0, 3), dtype=np.float32),
            opacity_logits=np.zeros((0,), dtype=np.float32),
            colors_dc=np.zeros((0, 3), dtype=np.float32),
            sh_rest=np.zeros((0, SH_REST_MAX), dtype=np.float32),
            sh_degree=sh_degree,
        )

    @staticmethod
    def from_splats(splats: list[GaussianSplat], sh_degree: int = 0) -> "SplatCloud":
        if not splats:
            return SplatCloud.empty(sh_degree)
        return SplatCloud(
            positions=np.array([s.position.to_array() for s in splats], dtype=np.float32),
            rotations=np.array([s.rotation.to_array() for s in splats], dtype=np.float32),
            log_scales=np.array([s.log_scale.to_array() for s in splats], dtype=np.float32),
            opacity_logits=np.array([s.opacity_logit for s in splats], dtype=np.float32),
            colors_dc=np.array([s.color_dc for s in splats], dtype=np.float32),
            sh_rest=np.array([s.sh_rest for s in splats], dtype=np.float32),
            sh_degree=sh_degree,
        )

    def __len__(self) -> int:
        return self.positions.shape[0]

    def splat(self, i: int) -> GaussianSplat:
        return GaussianSplat(
            position=Vec3.from_array(self.positions[i]),
            rotation=Quat.from_array(self.rotations[i]),
            log_scale=Vec3.from_array(self.log_scales[i]),
            opacity_logit=float(self.opacity_logits[i]),
            color_dc=tuple(float(c) for c in self.colors_dc[i]),
            sh_rest=tuple(float(c) for c in self.sh_rest[i]),
        )

    def __iter__(self):
        return (self.splat(i) for i in range(len(self)))

    def take(self, indices: np.ndarray) -> "SplatCloud":
        return SplatCloud(
            positions=self.positions[indices],
            rotations=self.rotations[indices],
            log_scales=self.log_scales[indices],
            opacity_logits=self.opacity_logits[indices],
            colors_dc=self.colors_dc[indices],
            sh_rest=self.sh_rest[indices],
            sh_degree=self.sh_degree,
        )

    def bounds(self) -> Aabb:
        return Aabb.of_points(self.positions.astype(np.float64))

    def allclose(self, other: "SplatCloud", atol: float = 0.0) -> bool:
        if len(self) != len(other) or self.sh_degree != other.sh_degree:
            return False
        pairs = [
            (self.positions, other.positions),
            (self.rotations, other.rotations),
            (self.log_scales, other.log_scales),
            (self.opacity_logits, other.opacity_logits),
            (self.colors_dc, other.colors_dc),
            (self.sh_rest, other.sh_rest),
        ]
        if atol == 0.0:
            return all(np.array_equal(a, b) for a, b in pairs)
        return all(np.allclose(a, b, atol=atol, rtol=0.0) for a, b in pairs)


def covariance_of(splat: GaussianSplat) -> np.ndarray:
    """World covariance Sigma = R diag(exp(2 * log_scale)) R^T, float64."""
    r = splat.rotation.normalized().to_matrix()
    var = np.exp(2.0 * splat.log_scale.to_array())
    return (r * var) @ r.T


def covariances_of(cloud: SplatCloud) -> np.ndarray:
    """(N, 3, 3) covariances for a whole cloud."""
    r = quats_to_matrices(cloud.rotations.astype(np.float64))
    var = np.exp(2.0 * cloud.log_scales.astype(np.float64))
    return (r * var[:, None, :]) @ np.swapaxes(r, 1, 2)


def transform_cloud(cloud: SplatCloud, t: TransformTRS) -> SplatCloud:
    """Rigid + uniform-scale transform of every splat.

    Positions are scaled/rotated/translated; rotations are left-composed with
    t.rotation; log-scales shift by ln(scale). Opacity and colors pass through.
    """
    if not t.scale > 0:
        raise NonPositiveScale(f"scale must be > 0, got {t.scale}")
    if len(cloud) == 0:
        return cloud
    m = t.rotation.to_matrix()
    pos = cloud.positions.astype(np.float64) @ m.T * t.scale + t.translation.to_array()
    tq = np.broadcast_to(t.rotation.to_array(), (len(cloud), 4))
    rot = quat_multiply_arrays(tq, cloud.rotations.astype(np.float64))
    rot = rot / np.linalg.norm(rot, axis=1, keepdims=True)
    log_scales = cloud.log_scales.astype(np.float64) + np.log(t.scale)
    return SplatCloud(
        positions=pos.astype(np.float32),
        rotations=rot.astype(np.float32),
        log_scales=log_scales.astype(np.float32),
        opacity_logits=cloud.opacity_logits,
        colors_dc=cloud.colors_dc,
        sh_rest=cloud.sh_rest,
        sh_degree=cloud.sh_degree,
    )


def crop_aabb(cloud: SplatCloud, box: Aabb) -> SplatCloud:
    """Keep exactly the splats whose positions lie inside the closed box."""
    box.validate()
    lo = box.min.to_array().astype(np.float32)
    hi = box.max.to_array().astype(np.float32)
    inside = np.all((cloud.positions >= lo) & (cloud.positions <= hi), axis=1)
    return cloud.take(np.nonzero(inside)[0])


def merge_clouds(clouds: list[SplatCloud]) -> SplatCloud:
    """Concatenate clouds in order; lower-degree clouds are zero-padded."""
    if not clouds:
        return SplatCloud.empty()
    degree = max(c.sh_degree for c in clouds)
    return SplatCloud(
        positions=np.concatenate([c.positions for c in clouds]),
        rotations=np.concatenate([c.rotations for c in clouds]),
        log_scales=np.concatenate([c.log_scales for c in clouds]),
        opacity_logits=np.concatenate([c.opacity_logits for c in clouds]),
        colors_dc=np.concatenate([c.colors_dc for c in clouds]),
        sh_rest=np.concatenate([c.sh_rest for c in clouds]),
        sh_degree=degree,
    )
