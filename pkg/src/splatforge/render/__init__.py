from .camera import DEFAULT_FOV_Y, DEFAULT_SNAPSHOT_SIZE, Camera
from .compose import compose_snapshot, load_image_rgb
from .images import (
    DEFAULT_BACKGROUND,
    DEPTH_INF_SENTINEL,
    DEPTH_MAX_CODE,
    ImageFormatError,
    RenderTarget,
    parse_pgm16,
    parse_pgm16_codes,
    parse_ppm,
    write_pgm16,
    write_ppm,
)
from .primitives import SurfaceBuffer, render_primitives
from .splat_raster import (
    ALPHA_SKIP,
    FOOTPRINT_RADIUS_SIGMA,
    LOW_PASS_FLOOR_PX2,
    TRANSMITTANCE_TERMINATE,
    FootprintBatch,
    SplatFootprint,
    project_cloud,
    project_splat,
    render_splats,
    render_splats_float,
)

__all__ = [
    "ALPHA_SKIP",
    "Camera",
    "DEFAULT_BACKGROUND",
    "DEFAULT_FOV_Y",
    "DEFAULT_SNAPSHOT_SIZE",
    "DEPTH_INF_SENTINEL",
    "DEPTH_MAX_CODE",
    "FOOTPRINT_RADIUS_SIGMA",
    "FootprintBatch",
    "ImageFormatError",
    "LOW_PASS_FLOOR_PX2",
    "RenderTarget",
    "SplatFootprint",
    "SurfaceBuffer",
    "TRANSMITTANCE_TERMINATE",
    "compose_snapshot",
    "load_image_rgb",
    "parse_pgm16",
    "parse_pgm16_codes",
    "parse_ppm",
    "project_cloud",
    "project_splat",
    "render_primitives",
    "render_splats",
    "render_splats_float",
    "write_pgm16",
    "write_ppm",
]
