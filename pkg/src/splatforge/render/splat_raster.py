"""Perspective splat projection and front-to-back alpha compositing.

Projection maps each 3D Gaussian to a 2D footprint: the pinhole projection of
its mean plus the affine (Jacobian) image of its camera-space covariance,
with a +0.3 px^2 diagonal floor that prevents sub-pixel aliasing and singular
conics. Compositing sorts footprints by view depth (stable ties), accumulates
alpha * transmittance per pixel, and stops a pixel once its transmittance
falls below 1e-4. Colors use only the spherical-harmonic DC term.

Everything here is a pure function of its inputs; output bytes do not depend
on any internal evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..geometry import TransformTRS, quats_to_matrices
from ..splats import SH_C0, GaussianSplat, SplatCloud
from .camera import Camera
from .images import DEFAULT_BACKGROUND, RenderTarget

LOW_PASS_FLOOR_PX2 = 0.3
ALPHA_SKIP = 1.0 / 255.0
TRANSMITTANCE_TERMINATE = 1e-4
DEPTH_WEIGHT_EPS = 1e-6
# alpha >= 1/255 implies the Mahalanobis radius is < 3.33 sigma for any
# alpha_max < 1, so a 3.5 sigma bounding box loses nothing.
FOOTPRINT_RADIUS_SIGMA = 3.5


@dataclass(frozen=True)
class SplatFootprint:
    """Screen-space Gaussian: 2D mean/covariance, view depth, color, peak alpha."""

    mean2d: tuple[float, float]
    cov2d: np.ndarray  # (2, 2) symmetric positive definite
    depth: float
    color: tuple[float, float, float]
    alpha_max: float


class FootprintBatch:
    """Column layout of many footprints (the fast path for whole clouds)."""

    def __init__(self, mean2d, cov2d, depth, color, alpha_max):
        self.mean2d = np.asarray(mean2d, dtype=np.float64).reshape(-1, 2)
        self.cov2d = np.asarray(cov2d, dtype=np.float64).reshape(-1, 2, 2)
        self.depth = np.asarray(depth, dtype=np.float64).reshape(-1)
        self.color = np.asarray(color, dtype=np.float64).reshape(-1, 3)
        self.alpha_max = np.asarray(alpha_max, dtype=np.float64).reshape(-1)

    def __len__(self) -> int:
        return self.depth.shape[0]

    @staticmethod
    def empty() -> "FootprintBatch":
        return FootprintBatch(
            np.zeros((0, 2)), np.zeros((0, 2, 2)), np.zeros(0), np.zeros((0, 3)), np.zeros(0)
        )

    @staticmethod
    def concat(batches: list["FootprintBatch"]) -> "FootprintBatch":
        if not batches:
            return FootprintBatch.empty()
        return FootprintBatch(
            np.concatenate([b.mean2d for b in batches]),
            np.concatenate([b.cov2d for b in batches]),
            np.concatenate([b.depth for b in batches]),
            np.concatenate([b.color for b in batches]),
            np.concatenate([b.alpha_max for b in batches]),
        )

    @staticmethod
    def from_footprints(footprints: Sequence[SplatFootprint]) -> "FootprintBatch":
        if len(footprints) == 0:
            return FootprintBatch.empty()
        return FootprintBatch(
            [f.mean2d for f in footprints],
            [f.cov2d for f in footprints],
            [f.depth for f in footprints],
            [f.color for f in footprints],
            [f.alpha_max for f in footprints],
        )


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def project_cloud(
    cam: Camera, cloud: SplatCloud, object_transform: TransformTRS | None = None
) -> FootprintBatch:
    """Project every splat of a cloud; splats outside [near, far] are dropped."""
    cam.validate()
    if len(cloud) == 0:
        return FootprintBatch.empty()
    t = object_transform if object_transform is not None else TransformTRS.identity()
    t.validate()

    m_obj = t.rotation.to_matrix()
    pos_w = cloud.positions.astype(np.float64) @ m_obj.T * t.scale + t.translation.to_array()
    r_wc, t_wc = cam.world_to_camera()
    pos_c = pos_w @ r_wc.T + t_wc
    depth = -pos_c[:, 2]
    keep = (depth >= cam.near) & (depth <= cam.far)
    if not np.any(keep):
        return FootprintBatch.empty()
    pos_c = pos_c[keep]
    depth = depth[keep]

    # camera-space covariance: Rwc Robj Sigma Robj^T Rwc^T with uniform scale
    rot = quats_to_matrices(cloud.rotations[keep].astype(np.float64))
    var = np.exp(2.0 * (cloud.log_scales[keep].astype(np.float64) + math.log(t.scale)))
    rc = (r_wc @ m_obj)[None, :, :] @ rot
    cov_c = (rc * var[:, None, :]) @ np.swapaxes(rc, 1, 2)

    f = cam.focal_px
    x, y = pos_c[:, 0], pos_c[:, 1]
    n = depth.shape[0]
    jac = np.zeros((n, 2, 3), dtype=np.float64)
    jac[:, 0, 0] = f / depth
    jac[:, 0, 2] = f * x / depth**2
    jac[:, 1, 1] = -f / depth
    jac[:, 1, 2] = -f * y / depth**2
    cov2d = jac @ cov_c @ np.swapaxes(jac, 1, 2)
    cov2d[:, 0, 0] += LOW_PASS_FLOOR_PX2
    cov2d[:, 1, 1] += LOW_PASS_FLOOR_PX2

    mean2d = np.stack(
        [cam.width / 2.0 + f * x / depth, cam.height / 2.0 - f * y / depth], axis=1
    )
    color = np.clip(0.5 + SH_C0 * cloud.colors_dc[keep].astype(np.float64), 0.0, 1.0)
    alpha_max = _sigmoid(cloud.opacity_logits[keep].astype(np.float64))
    return FootprintBatch(mean2d, cov2d, depth, color, alpha_max)


def project_splat(
    cam: Camera, splat: GaussianSplat, object_transform: TransformTRS | None = None
) -> SplatFootprint | None:
    """Single-splat projection; None when the mean is outside [near, far]."""
    batch = project_cloud(cam, SplatCloud.from_splats([splat]), object_transform)
    if len(batch) == 0:
        return None
    return SplatFootprint(
        mean2d=(float(batch.mean2d[0, 0]), float(batch.mean2d[0, 1])),
        cov2d=batch.cov2d[0],
        depth=float(batch.depth[0]),
        color=tuple(float(c) for c in batch.color[0]),
        alpha_max=float(batch.alpha_max[0]),
    )


def render_splats_float(
    width: int,
    height: int,
    batch: FootprintBatch | Sequence[SplatFootprint],
    background: tuple[float, float, float] = DEFAULT_BACKGROUND,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Composite footprints; returns (rgb float in [0,1], depth, transmittance).

    rgb already includes the background weighted by remaining transmittance.
    Depth is the alpha-weighted mean view depth, +inf where the weight sum
    is below 1e-6.
    """
    if not isinstance(batch, FootprintBatch):
        batch = FootprintBatch.from_footprints(batch)

    rgb = np.zeros((height, width, 3), dtype=np.float64)
    depth_num = np.zeros((height, width), dtype=np.float64)
    weight = np.zeros((height, width), dtype=np.float64)
    transmittance = np.ones((height, width), dtype=np.float64)

    order = np.argsort(batch.depth, kind="stable")
    for i in order:
        a, b = batch.cov2d[i, 0, 0], batch.cov2d[i, 0, 1]
        c = batch.cov2d[i, 1, 1]
        det = a * c - b * b
        if det <= 0:
            continue
        lam_max = 0.5 * (a + c) + math.sqrt(max(0.25 * (a - c) ** 2 + b * b, 0.0))
        radius = FOOTPRINT_RADIUS_SIGMA * math.sqrt(lam_max)
        mx, my = batch.mean2d[i]
        x0 = max(int(math.floor(mx - radius - 0.5)), 0)
        x1 = min(int(math.ceil(mx + radius - 0.5)) + 1, width)
        y0 = max(int(math.floor(my - radius - 0.5)), 0)
        y1 = min(int(math.ceil(my + radius - 0.5)) + 1, height)
        if x0 >= x1 or y0 >= y1:
            continue

        xs = np.arange(x0, x1) + 0.5 - mx
        ys = np.arange(y0, y1) + 0.5 - my
        dx, dy = np.meshgrid(xs, ys)
        # quadratic form with the analytic 2x2 inverse
        q = (c * dx * dx - 2.0 * b * dx * dy + a * dy * dy) / det
        alpha = batch.alpha_max[i] * np.exp(-0.5 * q)

        t_patch = transmittance[y0:y1, x0:x1]
        live = (alpha >= ALPHA_SKIP) & (t_patch >= TRANSMITTANCE_TERMINATE)
        if not np.any(live):
            continue
        contrib = np.where(live, alpha * t_patch, 0.0)
        rgb[y0:y1, x0:x1] += contrib[:, :, None] * batch.color[i]
        depth_num[y0:y1, x0:x1] += contrib * batch.depth[i]
        weight[y0:y1, x0:x1] += contrib
        transmittance[y0:y1, x0:x1] = np.where(live, t_patch * (1.0 - alpha), t_patch)

    rgb += transmittance[:, :, None] * np.asarray(background, dtype=np.float64)
    depth = np.full((height, width), np.inf)
    covered = weight >= DEPTH_WEIGHT_EPS
    depth[covered] = depth_num[covered] / weight[covered]
    return rgb, depth, transmittance


def render_splats(
    cam: Camera,
    footprints: FootprintBatch | Sequence[SplatFootprint],
    background: tuple[float, float, float] = DEFAULT_BACKGROUND,
) -> RenderTarget:
    """Rasterize footprints over a constant background color."""
    cam.validate()
    rgb, depth, _ = render_splats_float(cam.width, cam.height, footprints, background)
    color = np.clip(np.rint(rgb * 255.0), 0, 255).astype(np.uint8)
    return RenderTarget(color=color, depth=depth)
