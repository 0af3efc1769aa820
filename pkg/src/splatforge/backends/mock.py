"""Deterministic mock backends for every module kind.

Mocks are content-aware but cheap: prompt-hashed hue tints over seeded value
noise for image kinds, procedural primitive unions for text-to-3D, luminance
heightfields for image-to-3D, and hue rotation for splat edits. Equal
(inputs, prompt, seed) produce byte-identical assets across processes; no
attempt is made to look photorealistic.
"""

from __future__ import annotations

import math
import time
from typing import Mapping

import numpy as np

from ..geometry import Quat, TransformTRS, Vec3, look_at
from ..meshio import (
    TriangleMesh,
    cube_mesh,
    cylinder_mesh,
    merge_meshes,
    sphere_mesh,
    write_obj,
)
from ..ply import parse_ply, write_ply
from ..render.camera import Camera
from ..render.images import parse_pgm16, parse_ppm, write_ppm
from ..render.primitives import render_primitives
from ..scene import Primitive, PrimitiveShape
from ..splats import SH_C0, SplatCloud
from .base import (
    AssetPayload,
    AssetRole,
    DimensionMismatch,
    EmptyPrompt,
    GenerationRequest,
    ModuleKind,
    UnsupportedKind,
)
from .hashing import SplitMix64, fnv1a64, hash01

NOISE_CELL_PX = 8
TINT_SATURATION = 0.75
TINT_VALUE = 0.9
HEIGHTFIELD_BLOCK = 8
HEIGHTFIELD_PEAK_M = 0.5

ENRICH_VOCABULARY = (
    "brushed brass accents", "weathered oak grain", "matte charcoal finish",
    "polished marble veining", "soft terracotta tones", "hammered copper sheen",
    "pale birch paneling", "deep walnut stain", "frosted glass inlays",
    "woven rattan texture", "satin nickel hardware", "distressed leather patina",
    "creamy limestone surface", "midnight velvet upholstery", "raw concrete cast",
    "iridescent ceramic glaze",
)


def prompt_hue_degrees(prompt: str) -> int:
    return fnv1a64(prompt) % 360


def _hsv_to_rgb_scalar(h01: float, s: float, v: float) -> np.ndarray:
    i = int(h01 * 6.0) % 6
    f = h01 * 6.0 - int(h01 * 6.0)
    p, q, t = v * (1 - s), v * (1 - f * s), v * (1 - (1 - f) * s)
    rgb = [(v, t, p), (q, v, p), (p, v, t), (p, q, v), (t, p, v), (v, p, q)][i]
    return np.array(rgb)


def _rgb_to_hsv(rgb: np.ndarray) -> np.ndarray:
    maxc = rgb.max(axis=-1)
    minc = rgb.min(axis=-1)
    v = maxc
    delta = maxc - minc
    s = np.where(maxc > 0, delta / np.where(maxc == 0, 1, maxc), 0.0)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    safe = np.where(delta == 0, 1.0, delta)
    h = np.where(
        maxc == r, (g - b) / safe,
        np.where(maxc == g, 2.0 + (b - r) / safe, 4.0 + (r - g) / safe),
    )
    h = np.where(delta == 0, 0.0, h / 6.0 % 1.0)
    return np.stack([h, s, v], axis=-1)


def _hsv_to_rgb(hsv: np.ndarray) -> np.ndarray:
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    i = np.floor(h * 6.0).astype(int) % 6
    f = h * 6.0 - np.floor(h * 6.0)
    p, q, t = v * (1 - s), v * (1 - f * s), v * (1 - (1 - f) * s)
    choices = np.stack(
        [
            np.stack([v, t, p], axis=-1), np.stack([q, v, p], axis=-1),
            np.stack([p, v, t], axis=-1), np.stack([p, q, v], axis=-1),
            np.stack([t, p, v], axis=-1), np.stack([v, p, q], axis=-1),
        ],
        axis=0,
    )
    return np.take_along_axis(choices, i[None, ..., None], axis=0)[0]


def value_noise(height: int, width: int, seed: int) -> np.ndarray:
    """Bilinear value noise on an 8 px lattice, in [0, 1)."""
    gh = height // NOISE_CELL_PX + 2
    gw = width // NOISE_CELL_PX + 2
    lattice = np.empty((gh, gw))
    for j in range(gh):
        for i in range(gw):
            lattice[j, i] = hash01("noise", seed, i, j)
    ys = np.arange(height) / NOISE_CELL_PX
    xs = np.arange(width) / NOISE_CELL_PX
    y0 = ys.astype(int)
    x0 = xs.astype(int)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    a = lattice[np.ix_(y0, x0)]
    b = lattice[np.ix_(y0, x0 + 1)]
    c = lattice[np.ix_(y0 + 1, x0)]
    d = lattice[np.ix_(y0 + 1, x0 + 1)]
    return a * (1 - fy) * (1 - fx) + b * (1 - fy) * fx + c * fy * (1 - fx) + d * fy * fx


def mock_stylize(
    image: np.ndarray, depth: np.ndarray, prompt: str, seed: int
) -> np.ndarray:
    """0.5*input + 0.5*(prompt-hued, seeded noise modulated by normalized depth).

    Background pixels (depth == +inf) receive the flat tint, so depth edges
    stay visible in the output.
    """
    if not prompt:
        raise EmptyPrompt("stylize requires a prompt")
    if image.shape[:2] != depth.shape[:2]:
        raise DimensionMismatch(
            f"image {image.shape[:2]} vs depth {depth.shape[:2]}"
        )
    h, w = depth.shape
    hue = prompt_hue_degrees(prompt)
    tint = _hsv_to_rgb_scalar(hue / 360.0, TINT_SATURATION, TINT_VALUE)
    noise = value_noise(h, w, seed)

    finite = np.isfinite(depth)
    if finite.any():
        dmin = depth[finite].min()
        dmax = depth[finite].max()
        dnorm = (depth - dmin) / (dmax - dmin) if dmax > dmin else np.full_like(depth, 0.5)
    else:
        dnorm = np.zeros_like(depth)
    modulation = np.where(finite, 1.0 - 0.5 * dnorm, 0.0)

    value = 1.0 - modulation * (1.0 - noise)  # flat tint where modulation is 0
    out = 0.5 * image.astype(np.float64) + 0.5 * (tint * 255.0) * value[:, :, None]
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def mock_instruct_image_edit(image: np.ndarray, prompt: str, seed: int) -> np.ndarray:
    """Edit preview: same tint-plus-noise recipe, no depth modulation."""
    if not prompt:
        raise EmptyPrompt("instruct image edit requires a prompt")
    h, w = image.shape[:2]
    hue = prompt_hue_degrees(prompt)
    tint = _hsv_to_rgb_scalar(hue / 360.0, TINT_SATURATION, TINT_VALUE)
    noise = value_noise(h, w, seed)
    out = 0.5 * image.astype(np.float64) + 0.5 * (tint * 255.0) * noise[:, :, None]
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


PREVIEW_CAMERA = Camera(
    position=Vec3(0.0, 1.2, 3.5),
    rotation=look_at(Vec3(0.0, 1.2, 3.5), Vec3(0.0, 0.6, 0.0)),
    fov_y=math.pi / 3,
    width=256,
    height=256,
)

_SHAPE_MESHES = {
    PrimitiveShape.SPHERE: sphere_mesh,
    PrimitiveShape.CUBE: cube_mesh,
    PrimitiveShape.CYLINDER: cylinder_mesh,
}
_SHAPE_ORDER = (PrimitiveShape.SPHERE, PrimitiveShape.CUBE, PrimitiveShape.CYLINDER)


def text_to_3d_primitives(prompt: str, seed: int) -> list[Primitive]:
    """Seeded union of 3..6 primitives.

    Draw order from SplitMix64(fnv1a64(prompt) ^ seed): count, then per
    primitive shape index, tx, ty, tz, scale, y-angle. Tests re-derive the
    stream, so changing the order is a breaking change.
    """
    if not prompt:
        raise EmptyPrompt("text-to-3D preview requires a prompt")
    rng = SplitMix64(fnv1a64(prompt) ^ seed)
    count = rng.randint(3, 6)
    prims = []
    for _ in range(count):
        shape = _SHAPE_ORDER[rng.randint(0, 2)]
        tx = rng.uniform(-0.8, 0.8)
        ty = rng.uniform(0.1, 1.2)
        tz = rng.uniform(-0.8, 0.8)
        scale = rng.uniform(0.15, 0.5)
        angle = rng.uniform(0.0, 2.0 * math.pi)
        prims.append(
            Primitive(
                shape,
                TransformTRS(
                    Vec3(tx, ty, tz), Quat.from_axis_angle(Vec3(0, 1, 0), angle), scale
                ),
            )
        )
    return prims


def mock_text_to_3d_preview(prompt: str, seed: int) -> tuple[bytes, bytes]:
    """Low-fidelity mesh (OBJ bytes) and its render (PPM bytes)."""
    prims = text_to_3d_primitives(prompt, seed)
    meshes = []
    for p in prims:
        base = _SHAPE_MESHES[p.shape]()
        meshes.append(
            base.transformed(
                p.transform.rotation.to_matrix(),
                p.transform.translation.to_array(),
                p.transform.scale,
            )
        )
    obj_bytes = write_obj(merge_meshes(meshes))
    target = render_primitives(PREVIEW_CAMERA, prims)
    return obj_bytes, write_ppm(target.color)


def mock_image_to_3d(image: np.ndarray, seed: int = 0) -> bytes:
    """Luminance heightfield: one grid vertex per 8x8 block, OBJ output.

    Deterministic from the image alone; the seed is accepted for interface
    symmetry but does not influence the geometry.
    """
    h, w = image.shape[:2]
    gh = max(h // HEIGHTFIELD_BLOCK, 1)
    gw = max(w // HEIGHTFIELD_BLOCK, 1)
    lum = (
        0.299 * image[..., 0].astype(np.float64)
        + 0.587 * image[..., 1].astype(np.float64)
        + 0.114 * image[..., 2].astype(np.float64)
    )
    heights = np.zeros((gh, gw))
    for j in range(gh):
        for i in range(gw):
            block = lum[
                j * HEIGHTFIELD_BLOCK : (j + 1) * HEIGHTFIELD_BLOCK,
                i * HEIGHTFIELD_BLOCK : (i + 1) * HEIGHTFIELD_BLOCK,
            ]
            heights[j, i] = block.mean()
    xs = np.linspace(-0.5, 0.5, gw) if gw > 1 else np.zeros(1)
    zs = np.linspace(-0.5, 0.5, gh) if gh > 1 else np.zeros(1)
    verts = np.array(
        [
            [xs[i], heights[j, i] / 255.0 * HEIGHTFIELD_PEAK_M, zs[j]]
            for j in range(gh)
            for i in range(gw)
        ]
    )
    faces = []
    for j in range(gh - 1):
        for i in range(gw - 1):
            a = j * gw + i
            b = a + 1
            c = a + gw
            d = c + 1
            faces.append([a, b, c])
            faces.append([b, d, c])
    return write_obj(TriangleMesh(verts, np.array(faces, dtype=np.int32).reshape(-1, 3)))


def mock_splat_edit(cloud: SplatCloud, prompt: str, seed: int = 0) -> SplatCloud:
    """Hue-rotate DC colors by fnv1a64(prompt) mod 360 degrees; geometry untouched."""
    if not prompt:
        raise EmptyPrompt("splat edit requires a prompt")
    if len(cloud) == 0:
        return cloud
    hue_shift = prompt_hue_degrees(prompt) / 360.0
    rgb = np.clip(0.5 + SH_C0 * cloud.colors_dc.astype(np.float64), 0.0, 1.0)
    hsv = _rgb_to_hsv(rgb)
    hsv[..., 0] = (hsv[..., 0] + hue_shift) % 1.0
    new_dc = ((_hsv_to_rgb(hsv) - 0.5) / SH_C0).astype(np.float32)
    return SplatCloud(
        positions=cloud.positions,
        rotations=cloud.rotations,
        log_scales=cloud.log_scales,
        opacity_logits=cloud.opacity_logits,
        colors_dc=new_dc,
        sh_rest=cloud.sh_rest,
        sh_degree=cloud.sh_degree,
    )


def mock_enrich(prompt: str, scene_image: bytes) -> str:
    """Append two descriptors picked by the hash of the scene image bytes."""
    if not prompt:
        raise EmptyPrompt("prompt enrichment requires a prompt")
    h = fnv1a64(scene_image)
    first = h % len(ENRICH_VOCABULARY)
    second = (h >> 8) % len(ENRICH_VOCABULARY)
    if second == first:
        second = (second + 1) % len(ENRICH_VOCABULARY)
    return f"{prompt}, {ENRICH_VOCABULARY[first]}, {ENRICH_VOCABULARY[second]}"


PPM = "image/x-portable-pixmap"
OBJ = "model/obj"
PLY = "application/octet-stream"


class MockBackend:
    """Total, deterministic backend over all module kinds.

    `delays` (seconds, scalar or per-kind) simulate model latency for the
    latency-hiding tests; they do not affect output bytes.
    """

    def __init__(self, delays: float | Mapping[ModuleKind, float] = 0.0):
        self.delays = delays

    def supports(self, kind: ModuleKind) -> bool:
        return True

    def _delay_for(self, kind: ModuleKind) -> float:
        if isinstance(self.delays, Mapping):
            return float(self.delays.get(kind, 0.0))
        return float(self.delays)

    def run(self, req: GenerationRequest) -> list[AssetPayload]:
        delay = self._delay_for(req.kind)
        if delay > 0:
            time.sleep(delay)
        kind = req.kind
        if kind == ModuleKind.INSTRUCT_IMAGE_EDIT:
            image = parse_ppm(req.input_image)
            out = mock_instruct_image_edit(image, req.prompt, req.seed)
            return [AssetPayload(AssetRole.PREVIEW_IMAGE, write_ppm(out), PPM)]
        if kind == ModuleKind.IMAGE_STYLIZE:
            image = parse_ppm(req.input_image)
            depth = parse_pgm16(req.input_depth, near=0.0, far=1.0)
            out = mock_stylize(image, depth, req.prompt, req.seed)
            return [AssetPayload(AssetRole.PREVIEW_IMAGE, write_ppm(out), PPM)]
        if kind == ModuleKind.TEXT_TO_3D_PREVIEW:
            obj_bytes, ppm_bytes = mock_text_to_3d_preview(req.prompt, req.seed)
            return [
                AssetPayload(AssetRole.LOW_FI_MESH, obj_bytes, OBJ),
                AssetPayload(AssetRole.PREVIEW_IMAGE, ppm_bytes, PPM),
            ]
        if kind == ModuleKind.IMAGE_TO_3D:
            image = parse_ppm(req.input_image)
            return [AssetPayload(AssetRole.FULL_MESH, mock_image_to_3d(image, req.seed), OBJ)]
        if kind == ModuleKind.SPLAT_EDIT:
            cloud = parse_ply(req.input_cloud)
            edited = mock_splat_edit(cloud, req.prompt, req.seed)
            return [AssetPayload(AssetRole.EDITED_CLOUD, write_ply(edited), PLY)]
        if kind == ModuleKind.PROMPT_ENRICH:
            text = mock_enrich(req.prompt, req.input_image)
            return [
                AssetPayload(AssetRole.ENRICHED_PROMPT, text.encode("utf-8"), "text/plain")
            ]
        raise UnsupportedKind(str(kind))  # pragma: no cover - closed enum
