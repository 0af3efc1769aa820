"""Render targets and codec-free image formats.

Color goes out as binary PPM (P6, maxval 255) and depth as 16-bit big-endian
binary PGM (P5), linearly mapping [near, far] to [0, 65534] with 65535
reserved as the +inf (empty) sentinel. Both formats are trivially
byte-comparable, which keeps golden tests exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEPTH_INF_SENTINEL = 65535
DEPTH_MAX_CODE = 65534

DEFAULT_BACKGROUND = (0.25, 0.25, 0.25)


class ImageFormatError(ValueError):
    pass


@dataclass
class RenderTarget:
    """Color image plus view-space depth map (meters, +inf where empty)."""

    color: np.ndarray  # (H, W, 3) uint8
    depth: np.ndarray  # (H, W) float64, +inf sentinel

    @property
    def width(self) -> int:
        return self.color.shape[1]

    @property
    def height(self) -> int:
        return self.color.shape[0]


def write_ppm(color: np.ndarray) -> bytes:
    h, w = color.shape[:2]
    header = f"P6\n{w} {h}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(color, dtype=np.uint8).tobytes()


def write_pgm16(depth: np.ndarray, near: float, far: float) -> bytes:
    h, w = depth.shape
    header = f"P5\n{w} {h}\n65535\n".encode("ascii")
    finite = np.isfinite(depth)
    scaled = np.zeros((h, w), dtype=np.float64)
    np.clip((depth - near) / (far - near), 0.0, 1.0, out=scaled, where=finite)
    codes = np.rint(scaled * DEPTH_MAX_CODE).astype(np.uint16)
    codes[~finite] = DEPTH_INF_SENTINEL
    return header + codes.astype(">u2").tobytes()


def _parse_pnm_header(data: bytes, magic: bytes) -> tuple[int, int, int, int]:
    """Returns (width, height, maxval, body_offset)."""
    if not data.startswith(magic):
        raise ImageFormatError(f"expected {magic!r} image")
    # header tokens may be separated by any whitespace; comments start with '#'
    tokens: list[int] = []
    i = len(magic)
    while len(tokens) < 3:
        while i < len(data) and data[i : i + 1].isspace():
            i += 1
        if i < len(data) and data[i : i + 1] == b"#":
            while i < len(data) and data[i] != 0x0A:
                i += 1
            continue
        start = i
        while i < len(data) and not data[i : i + 1].isspace():
            i += 1
        if start == i:
            raise ImageFormatError("truncated header")
        tokens.append(int(data[start:i]))
    i += 1  # single whitespace after maxval
    return tokens[0], tokens[1], tokens[2], i


def parse_ppm(data: bytes) -> np.ndarray:
    w, h, maxval, offset = _parse_pnm_header(data, b"P6")
    if maxval != 255:
        raise ImageFormatError(f"unsupported PPM maxval {maxval}")
    body = data[offset : offset + w * h * 3]
    if len(body) < w * h * 3:
        raise ImageFormatError("PPM body truncated")
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w, 3).copy()


def parse_pgm16(data: bytes, near: float, far: float) -> np.ndarray:
    """Inverse of write_pgm16 (up to quantization); sentinel decodes to +inf."""
    w, h, maxval, offset = _parse_pnm_header(data, b"P5")
    if maxval != 65535:
        raise ImageFormatError(f"unsupported PGM maxval {maxval}")
    body = data[offset : offset + w * h * 2]
    if len(body) < w * h * 2:
        raise ImageFormatError("PGM body truncated")
    codes = np.frombuffer(body, dtype=">u2").reshape(h, w).astype(np.float64)
    depth = near + codes / DEPTH_MAX_CODE * (far - near)
    depth[codes == DEPTH_INF_SENTINEL] = np.inf
    return depth


def parse_pgm16_codes(data: bytes) -> np.ndarray:
    """Raw 16-bit code plane of a depth PGM."""
    w, h, maxval, offset = _parse_pnm_header(data, b"P5")
    if maxval != 65535:
        raise ImageFormatError(f"unsupported PGM maxval {maxval}")
    body = data[offset : offset + w * h * 2]
    if len(body) < w * h * 2:
        raise ImageFormatError("PGM body truncated")
    return np.frombuffer(body, dtype=">u2").reshape(h, w).copy()
