"""Whole-scene snapshots: surfaces and splats merged per pixel by depth.

Surfaces (primitives, meshes, proxy billboards) resolve to a nearest-hit
color+depth buffer; all splat objects composite in one front-to-back pass.
Per pixel the nearer of surface depth and alpha-weighted splat depth wins,
with splats compositing over any farther surface.
"""

from __future__ import annotations

import io

import numpy as np

from ..assets import AssetStore
from ..geometry import Vec3
from ..meshio import parse_obj
from ..ply import parse_ply
from ..scene import ObjectKindTag, Scene
from .camera import Camera
from .images import DEFAULT_BACKGROUND, ImageFormatError, RenderTarget, parse_ppm
from .primitives import SurfaceBuffer
from .splat_raster import FootprintBatch, project_cloud, render_splats_float


def load_image_rgb(assets: AssetStore, asset_id: str) -> np.ndarray:
    """Decode an image asset to (H, W, 3) uint8; PPM natively, PNG via Pillow."""
    data = assets.get(asset_id)
    if data.startswith(b"P6"):
        return parse_ppm(data)
    if data.startswith(b"\x89PNG"):
        from PIL import Image

        with Image.open(io.BytesIO(data)) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8)
    raise ImageFormatError(f"asset {asset_id!r} is not a decodable image")


def compose_snapshot(
    scene: Scene,
    cam: Camera,
    assets: AssetStore,
    background: tuple[float, float, float] = DEFAULT_BACKGROUND,
) -> RenderTarget:
    cam.validate()
    surfaces = SurfaceBuffer(cam)
    batches: list[FootprintBatch] = []

    for obj in scene.objects:
        kind = obj.kind
        if kind.tag == ObjectKindTag.SPLAT:
            cloud = parse_ply(assets.get(kind.asset))
            batches.append(project_cloud(cam, cloud, obj.transform))
        elif kind.tag == ObjectKindTag.PRIMITIVE_ARRANGEMENT:
            for prim in kind.primitives:
                surfaces.add_primitive(prim, obj.transform)
        elif kind.tag in (ObjectKindTag.MESH, ObjectKindTag.PROXY3D):
            mesh = parse_obj(assets.get(kind.asset))
            m = obj.transform.rotation.to_matrix()
            surfaces.add_mesh(
                mesh.transformed(m, obj.transform.translation.to_array(), obj.transform.scale)
            )
        elif kind.tag == ObjectKindTag.PROXY2D:
            if kind.asset is None:
                continue  # label-only placeholder, nothing to draw headlessly
            texture = load_image_rgb(assets, kind.asset)
            center = obj.transform.apply_point(Vec3(0.0, 0.5, 0.0))
            surfaces.add_billboard(center, obj.transform.scale, texture)

    batch = FootprintBatch.concat(batches) if batches else FootprintBatch.empty()
    splat_rgb, splat_depth, transmittance = render_splats_float(
        cam.width, cam.height, batch, background=(0.0, 0.0, 0.0)
    )

    surf_depth = surfaces.depth
    surf_hit = np.isfinite(surf_depth)
    bg = np.asarray(background, dtype=np.float64)
    surf_color_full = np.where(surf_hit[:, :, None], surfaces.color, bg)

    splat_in_front = splat_depth <= surf_depth  # inf vs inf -> background path
    color = np.where(
        splat_in_front[:, :, None],
        splat_rgb + transmittance[:, :, None] * surf_color_full,
        surf_color_full,
    )
    depth = np.where(splat_in_front, splat_depth, surf_depth)

    color8 = np.clip(np.rint(color * 255.0), 0, 255).astype(np.uint8)
    return RenderTarget(color=color8, depth=depth)
