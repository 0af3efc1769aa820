"""Analytic ray tracing of primitive shapes, triangle meshes, and billboards.

Local shapes before their TRS transform: sphere of radius 1, cube spanning
[-1, 1]^3, cylinder of radius 1 along y with |y| <= 1. Surfaces are shaded
flat Lambert with a headlight (light along the view ray) over a uniform
light-gray albedo; billboards are unlit textured quads facing the camera.
Depth is planar view-space distance (-z in camera frame), clamped to the
camera's [near, far] window.
"""

from __future__ import annotations

import numpy as np

from ..geometry import TransformTRS, Vec3
from ..meshio import TriangleMesh
from ..scene import Primitive, PrimitiveShape
from .camera import Camera
from .images import DEFAULT_BACKGROUND, RenderTarget

ALBEDO = np.array([0.8, 0.8, 0.8])
AMBIENT = 0.15
_T_EPS = 1e-9


class SurfaceBuffer:
    """Nearest-hit accumulation buffers for one camera."""

    def __init__(self, cam: Camera):
        cam.validate()
        self.cam = cam
        self.dirs = cam.ray_directions()  # (H, W, 3) world unit
        r_wc, _ = cam.world_to_camera()
        # planar-depth factor: depth = t * cos(angle to optical axis)
        self.depth_factor = -(self.dirs @ r_wc[2])
        self.depth = np.full((cam.height, cam.width), np.inf)
        self.color = np.zeros((cam.height, cam.width, 3), dtype=np.float64)

    def _commit(self, t: np.ndarray, rgb: np.ndarray) -> None:
        """Fold per-pixel candidate hits (t = world ray distance) into buffers."""
        depth = t * self.depth_factor
        ok = np.isfinite(t) & (depth >= self.cam.near) & (depth <= self.cam.far)
        nearer = ok & (depth < self.depth)
        self.depth[nearer] = depth[nearer]
        self.color[nearer] = rgb[nearer]

    def _shade(self, normals: np.ndarray) -> np.ndarray:
        lambert = np.maximum(-np.sum(self.dirs * normals, axis=-1), 0.0)
        return ALBEDO * (AMBIENT + (1.0 - AMBIENT) * lambert)[:, :, None]

    def add_primitive(self, prim: Primitive, parent: TransformTRS | None = None) -> None:
        world = parent.compose(prim.transform) if parent is not None else prim.transform
        world.validate()
        inv_m = world.rotation.conjugate().to_matrix()
        o_local = inv_m @ (self.cam.position.to_array() - world.translation.to_array())
        o_local /= world.scale
        d_local = (self.dirs @ inv_m.T) / world.scale

        if prim.shape == PrimitiveShape.SPHERE:
            t, n_local = _intersect_sphere(o_local, d_local)
        elif prim.shape == PrimitiveShape.CUBE:
            t, n_local = _intersect_cube(o_local, d_local)
        else:
            t, n_local = _intersect_cylinder(o_local, d_local)

        normals = n_local @ world.rotation.to_matrix().T
        self._commit(t, self._shade(normals))

    def add_mesh(self, mesh: TriangleMesh) -> None:
        """Triangle soup via per-triangle intersection over its screen bbox."""
        if len(mesh.faces) == 0:
            return
        h, w = self.depth.shape
        o = self.cam.position.to_array()
        r_wc, t_wc = self.cam.world_to_camera()
        f = self.cam.focal_px
        verts_cam = mesh.vertices @ r_wc.T + t_wc
        for face in mesh.faces:
            a, b, c = mesh.vertices[face[0]], mesh.vertices[face[1]], mesh.vertices[face[2]]
            y0, y1, x0, x1 = _triangle_pixel_bbox(
                verts_cam[face], f, w, h, self.cam.near
            )
            if x0 >= x1 or y0 >= y1:
                continue
            d = self.dirs[y0:y1, x0:x1]
            e1, e2 = b - a, c - a
            pvec = np.cross(d, e2)
            det = pvec @ e1
            tvec = o - a
            qvec = np.cross(tvec, e1)
            with np.errstate(divide="ignore", invalid="ignore"):
                inv = 1.0 / det
                u = (pvec @ tvec) * inv
                v = (d @ qvec) * inv
                t = (e2 @ qvec) * inv
            hit = (np.abs(det) > 1e-12) & (u >= 0) & (v >= 0) & (u + v <= 1) & (t > _T_EPS)
            if not np.any(hit):
                continue
            n = np.cross(e1, e2)
            norm = np.linalg.norm(n)
            if norm == 0.0:
                continue
            n = n / norm
            normals = np.where((d @ n)[:, :, None] > 0, -n, n)  # two-sided
            lambert = np.maximum(-np.sum(d * normals, axis=-1), 0.0)
            rgb = ALBEDO * (AMBIENT + (1.0 - AMBIENT) * lambert)[:, :, None]
            t_full = np.where(hit, t, np.inf)
            depth = t_full * self.depth_factor[y0:y1, x0:x1]
            ok = (
                np.isfinite(t_full)
                & (depth >= self.cam.near)
                & (depth <= self.cam.far)
                & (depth < self.depth[y0:y1, x0:x1])
            )
            self.depth[y0:y1, x0:x1][ok] = depth[ok]
            self.color[y0:y1, x0:x1][ok] = rgb[ok]

    def add_billboard(self, center: Vec3, size_m: float, texture: np.ndarray) -> None:
        """Camera-facing textured quad, `size_m` tall, aspect from the texture."""
        tex_h, tex_w = texture.shape[:2]
        height = size_m
        width = size_m * (tex_w / tex_h)
        c = center.to_array()
        o = self.cam.position.to_array()
        n = o - c
        dist = np.linalg.norm(n)
        if dist < 1e-9:
            return
        n = n / dist
        up = np.array([0.0, 1.0, 0.0])
        right = np.cross(up, n)
        if np.linalg.norm(right) < 1e-8:
            right = np.cross(np.array([0.0, 0.0, 1.0]), n)
        right /= np.linalg.norm(right)
        up_b = np.cross(n, right)

        denom = self.dirs @ n
        with np.errstate(divide="ignore", invalid="ignore"):
            t = ((c - o) @ n) / denom
        t_safe = np.where(np.isfinite(t), t, 0.0)
        p = o + t_safe[:, :, None] * self.dirs
        rel = p - c
        au = rel @ right
        av = rel @ up_b
        inside = (
            (t > _T_EPS)
            & np.isfinite(t)
            & (np.abs(au) <= width / 2)
            & (np.abs(av) <= height / 2)
        )
        # nearest-texel sampling
        px = np.clip(((au / width + 0.5) * tex_w).astype(np.int64), 0, tex_w - 1)
        py = np.clip(((0.5 - av / height) * tex_h).astype(np.int64), 0, tex_h - 1)
        rgb = texture[py, px].astype(np.float64) / 255.0
        t_full = np.where(inside, t, np.inf)
        self._commit(t_full, rgb)

    def into_target(self, background: tuple[float, float, float]) -> RenderTarget:
        covered = np.isfinite(self.depth)
        rgb = np.where(covered[:, :, None], self.color, np.asarray(background))
        color = np.clip(np.rint(rgb * 255.0), 0, 255).astype(np.uint8)
        return RenderTarget(color=color, depth=self.depth.copy())


def _triangle_pixel_bbox(verts_cam: np.ndarray, f: float, w: int, h: int, near: float):
    """Conservative screen bbox; whole image if any vertex is near the camera plane."""
    depths = -verts_cam[:, 2]
    if np.any(depths < near * 0.5):
        return 0, h, 0, w
    u = w / 2.0 + f * verts_cam[:, 0] / depths
    v = h / 2.0 - f * verts_cam[:, 1] / depths
    x0 = max(int(np.floor(u.min())) - 1, 0)
    x1 = min(int(np.ceil(u.max())) + 2, w)
    y0 = max(int(np.floor(v.min())) - 1, 0)
    y1 = min(int(np.ceil(v.max())) + 2, h)
    return y0, y1, x0, x1


def _intersect_sphere(o: np.ndarray, d: np.ndarray):
    a = np.sum(d * d, axis=-1)
    b = d @ o
    c = float(o @ o) - 1.0
    disc = b * b - a * c
    with np.errstate(invalid="ignore"):
        root = np.sqrt(disc)
        t1 = (-b - root) / a
        t2 = (-b + root) / a
    t = np.where(disc >= 0, np.where(t1 > _T_EPS, t1, np.where(t2 > _T_EPS, t2, np.inf)), np.inf)
    t_safe = np.where(np.isfinite(t), t, 0.0)
    p = o + t_safe[:, :, None] * d
    return t, _safe_unit(p)


def _intersect_cube(o: np.ndarray, d: np.ndarray):
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / d
        t_lo = (-1.0 - o) * inv
        t_hi = (1.0 - o) * inv
    # axis-parallel rays: inside the slab -> (-inf, inf), outside -> empty
    parallel = d == 0.0
    if np.any(parallel):
        inside_slab = np.abs(o) <= 1.0
        t_lo = np.where(parallel, np.where(inside_slab, -np.inf, np.inf), t_lo)
        t_hi = np.where(parallel, np.where(inside_slab, np.inf, -np.inf), t_hi)
    tn = np.max(np.minimum(t_lo, t_hi), axis=-1)
    tf = np.min(np.maximum(t_lo, t_hi), axis=-1)
    hit = (tf >= tn) & (tf > _T_EPS)
    t = np.where(hit, np.where(tn > _T_EPS, tn, tf), np.inf)
    t_safe = np.where(np.isfinite(t), t, 0.0)
    p = o + t_safe[:, :, None] * d
    axis = np.argmax(np.abs(p), axis=-1)
    n = np.zeros_like(p)
    idx = np.indices(axis.shape)
    n[idx[0], idx[1], axis] = np.sign(p[idx[0], idx[1], axis])
    return t, n


def _intersect_cylinder(o: np.ndarray, d: np.ndarray):
    ox, oy, oz = o
    dx, dy, dz = d[:, :, 0], d[:, :, 1], d[:, :, 2]
    a = dx * dx + dz * dz
    b = ox * dx + oz * dz
    c = ox * ox + oz * oz - 1.0
    disc = b * b - a * c
    with np.errstate(divide="ignore", invalid="ignore"):
        root = np.sqrt(disc)
        s1 = (-b - root) / a
        s2 = (-b + root) / a

    def side_ok(s):
        y = oy + s * dy
        return (disc >= 0) & (s > _T_EPS) & (np.abs(y) <= 1.0)

    t_side = np.where(side_ok(s1), s1, np.where(side_ok(s2), s2, np.inf))

    with np.errstate(divide="ignore", invalid="ignore"):
        t_top = (1.0 - oy) / dy
        t_bot = (-1.0 - oy) / dy

    def cap_ok(s):
        x = ox + s * dx
        z = oz + s * dz
        return (s > _T_EPS) & np.isfinite(s) & (x * x + z * z <= 1.0)

    t_top = np.where(cap_ok(t_top), t_top, np.inf)
    t_bot = np.where(cap_ok(t_bot), t_bot, np.inf)

    t = np.minimum(t_side, np.minimum(t_top, t_bot))
    t_safe = np.where(np.isfinite(t), t, 0.0)
    p = o + t_safe[:, :, None] * d
    side_n = np.stack([p[:, :, 0], np.zeros_like(t), p[:, :, 2]], axis=-1)
    cap_n = np.stack([np.zeros_like(t), np.sign(p[:, :, 1]), np.zeros_like(t)], axis=-1)
    use_side = (t == t_side)[:, :, None]
    return t, _safe_unit(np.where(use_side, side_n, cap_n))


def _safe_unit(v: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(v, axis=-1, keepdims=True)
    return np.where(norm > 0, v / np.where(norm == 0, 1.0, norm), v)


def render_primitives(
    cam: Camera,
    arrangement: list[Primitive],
    arrangement_transform: TransformTRS | None = None,
    background: tuple[float, float, float] = DEFAULT_BACKGROUND,
) -> RenderTarget:
    """Nearest-hit render of a primitive arrangement."""
    buf = SurfaceBuffer(cam)
    for prim in arrangement:
        buf.add_primitive(prim, arrangement_transform)
    return buf.into_target(background)
