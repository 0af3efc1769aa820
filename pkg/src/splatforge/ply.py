"""Binary PLY ingestion and export for splat clouds.

Reads the common trained-splat vertex layout: float32 properties
x y z nx ny nz f_dc_0..2 f_rest_0..K-1 opacity scale_0..2 rot_0..3, where
rot_0 is the scalar quaternion component and K in {0, 9, 24, 45} fixes the
spherical-harmonic degree. Unknown scalar properties are skipped with their
declared width so files from diverse trainers load. Export round-trips every
numeric field bit-exactly (all fields are float32 end to end).
"""

from __future__ import annotations

import numpy as np

from .splats import SH_REST_MAX, SplatCloud, sh_degree_for_rest_count, sh_rest_count


class PlyError(ValueError):
    """Base for PLY ingestion failures."""


class BadMagic(PlyError):
    """File does not start with the 'ply' magic."""


class UnsupportedFormat(PlyError):
    """Not binary_little_endian 1.0, or uses unsupported constructs."""


class MissingField(PlyError):
    """Vertex element lacks a required splat property."""


class Truncated(PlyError):
    """Body shorter than vertex count times record stride."""


_SCALAR_TYPES = {
    "char": "i1", "int8": "i1",
    "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2",
    "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4",
    "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4",
    "double": "f8", "float64": "f8",
}

_REQUIRED = ("x", "y", "z", "opacity", "scale_0", "scale_1", "scale_2",
             "rot_0", "rot_1", "rot_2", "rot_3")


def _parse_header(data: bytes) -> tuple[int, list[tuple[str, str]], int]:
    """Returns (vertex_count, [(name, numpy dtype)], body_offset)."""
    if not data.startswith(b"ply"):
        raise BadMagic("missing 'ply' magic")
    end = data.find(b"end_header\n")
    if end < 0:
        raise UnsupportedFormat("header has no end_header line")
    body_offset = end + len(b"end_header\n")
    lines = data[:end].decode("ascii", errors="replace").splitlines()

    fmt = None
    vertex_count = None
    props: list[tuple[str, str]] = []
    in_vertex = False
    for line in lines[1:]:
        parts = line.split()
        if not parts or parts[0] == "comment":
            continue
        if parts[0] == "format":
            fmt = parts[1] if len(parts) > 1 else ""
        elif parts[0] == "element":
            in_vertex = len(parts) >= 3 and parts[1] == "vertex"
            if in_vertex:
                vertex_count = int(parts[2])
        elif parts[0] == "property" and in_vertex:
            if len(parts) >= 2 and parts[1] == "list":
                raise UnsupportedFormat("list properties in vertex element")
            if len(parts) != 3:
                raise UnsupportedFormat(f"malformed property line: {line!r}")
            _, ptype, name = parts
            if ptype not in _SCALAR_TYPES:
                raise UnsupportedFormat(f"unknown property type {ptype!r}")
            props.append((name, "<" + _SCALAR_TYPES[ptype]))
    if fmt != "binary_little_endian":
        raise UnsupportedFormat(f"format must be binary_little_endian 1.0, got {fmt!r}")
    if vertex_count is None:
        raise MissingField("no vertex element declared")
    return vertex_count, props, body_offset


def parse_ply(data: bytes) -> SplatCloud:
    """Parse binary little-endian PLY bytes into a splat cloud."""
    count, props, offset = _parse_header(data)
    names = [n for n, _ in props]
    for req in _REQUIRED:
        if req not in names:
            raise MissingField(f"vertex element lacks property {req!r}")

    rest_names = sorted(
        (n for n in names if n.startswith("f_rest_")),
        key=lambda n: int(n.split("_")[-1]),
    )
    sh_degree = sh_degree_for_rest_count(len(rest_names))

    dtype = np.dtype([(n, t) for n, t in props])
    body = data[offset:]
    needed = count * dtype.itemsize
    if len(body) < needed:
        raise Truncated(f"body holds {len(body)} bytes, need {needed}")
    rec = np.frombuffer(body, dtype=dtype, count=count)

    def col(name: str) -> np.ndarray:
        return np.ascontiguousarray(rec[name]).astype(np.float32, copy=False)

    def stack(cols: list[str]) -> np.ndarray:
        if count == 0:
            return np.zeros((0, len(cols)), dtype=np.float32)
        return np.stack([col(c) for c in cols], axis=1)

    sh_rest = np.zeros((count, SH_REST_MAX), dtype=np.float32)
    for i, name in enumerate(rest_names):
        sh_rest[:, i] = col(name)

    if "f_dc_0" in names:
        colors_dc = stack(["f_dc_0", "f_dc_1", "f_dc_2"])
    else:
        colors_dc = np.zeros((count, 3), dtype=np.float32)

    return SplatCloud(
        positions=stack(["x", "y", "z"]),
        rotations=stack(["rot_0", "rot_1", "rot_2", "rot_3"]),
        log_scales=stack(["scale_0", "scale_1", "scale_2"]),
        opacity_logits=col("opacity") if count else np.zeros((0,), dtype=np.float32),
        colors_dc=colors_dc,
        sh_rest=sh_rest,
        sh_degree=sh_degree,
    )


def write_ply(cloud: SplatCloud) -> bytes:
    """Export a cloud as binary little-endian PLY (normals written as zeros)."""
    k = sh_rest_count(cloud.sh_degree)
    names = (
        ["x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"]
        + [f"f_rest_{i}" for i in range(k)]
        + ["opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3"]
    )
    n = len(cloud)
    header = "".join(
        ["ply\n", "format binary_little_endian 1.0\n", f"element vertex {n}\n"]
        + [f"property float {name}\n" for name in names]
        + ["end_header\n"]
    ).encode("ascii")

    rec = np.zeros(n, dtype=np.dtype([(name, "<f4") for name in names]))
    for i, axis in enumerate(("x", "y", "z")):
        rec[axis] = cloud.positions[:, i]
    for i in range(3):
        rec[f"f_dc_{i}"] = cloud.colors_dc[:, i]
    for i in range(k):
        rec[f"f_rest_{i}"] = cloud.sh_rest[:, i]
    rec["opacity"] = cloud.opacity_logits
    for i in range(3):
        rec[f"scale_{i}"] = cloud.log_scales[:, i]
    for i in range(4):
        rec[f"rot_{i}"] = cloud.rotations[:, i]
    return header + rec.tobytes()
