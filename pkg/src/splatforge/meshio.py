"""Triangle meshes, OBJ text round-trip, and primitive tessellators.

OBJ output uses 9-significant-digit floats so identical meshes serialize to
identical bytes. Only `v` and `f` records are consumed on parse; anything
else is ignored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class ObjParseError(ValueError):
    pass


@dataclass
class TriangleMesh:
    vertices: np.ndarray  # (V, 3) float64
    faces: np.ndarray  # (F, 3) int32, zero-based

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.faces = np.asarray(self.faces, dtype=np.int32).reshape(-1, 3)

    def transformed(self, matrix: np.ndarray, translation: np.ndarray, scale: float = 1.0) -> "TriangleMesh":
        v = self.vertices @ matrix.T * scale + translation
        return TriangleMesh(v, self.faces)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        if len(self.vertices) == 0:
            return np.zeros(3), np.zeros(3)
        return self.vertices.min(axis=0), self.vertices.max(axis=0)


def write_obj(mesh: TriangleMesh) -> bytes:
    lines = []
    for v in mesh.vertices:
        lines.append(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}")
    for f in mesh.faces:
        lines.append(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_obj(data: bytes) -> TriangleMesh:
    vertices: list[list[float]] = []
    faces: list[list[int]] = []
    for raw in data.decode("utf-8", errors="replace").splitlines():
        parts = raw.split()
        if not parts:
            continue
        if parts[0] == "v":
            if len(parts) < 4:
                raise ObjParseError(f"short vertex line: {raw!r}")
            vertices.append([float(parts[1]), float(parts[2]), float(parts[3])])
        elif parts[0] == "f":
            if len(parts) < 4:
                raise ObjParseError(f"short face line: {raw!r}")
            # take the vertex index of each corner, fan-triangulate polygons
            idx = [int(p.split("/")[0]) - 1 for p in parts[1:]]
            for i in range(1, len(idx) - 1):
                faces.append([idx[0], idx[i], idx[i + 1]])
    return TriangleMesh(
        np.array(vertices, dtype=np.float64).reshape(-1, 3),
        np.array(faces, dtype=np.int32).reshape(-1, 3),
    )


def merge_meshes(meshes: list[TriangleMesh]) -> TriangleMesh:
    verts = []
    faces = []
    offset = 0
    for m in meshes:
        verts.append(m.vertices)
        faces.append(m.faces + offset)
        offset += len(m.vertices)
    if not verts:
        return TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int32))
    return TriangleMesh(np.concatenate(verts), np.concatenate(faces))


def sphere_mesh(segments: int = 12, rings: int = 8) -> TriangleMesh:
    """Unit-radius UV sphere centered at the origin."""
    verts = [[0.0, 1.0, 0.0]]
    for r in range(1, rings):
        phi = math.pi * r / rings
        for s in range(segments):
            theta = 2.0 * math.pi * s / segments
            verts.append([
                math.sin(phi) * math.cos(theta),
                math.cos(phi),
                math.sin(phi) * math.sin(theta),
            ])
    verts.append([0.0, -1.0, 0.0])
    bottom = len(verts) - 1
    faces = []
    for s in range(segments):
        faces.append([0, 1 + (s + 1) % segments, 1 + s])
    for r in range(rings - 2):
        base = 1 + r * segments
        nxt = base + segments
        for s in range(segments):
            s2 = (s + 1) % segments
            faces.append([base + s, base + s2, nxt + s])
            faces.append([base + s2, nxt + s2, nxt + s])
    base = 1 + (rings - 2) * segments
    for s in range(segments):
        faces.append([base + s, base + (s + 1) % segments, bottom])
    return TriangleMesh(np.array(verts), np.array(faces))


def cube_mesh() -> TriangleMesh:
    """Axis-aligned cube spanning [-1, 1]^3."""
    v = np.array([[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)], dtype=np.float64)
    quads = [
        [0, 1, 3, 2], [4, 6, 7, 5],  # x- x+
        [0, 4, 5, 1], [2, 3, 7, 6],  # y- y+
        [0, 2, 6, 4], [1, 5, 7, 3],  # z- z+
    ]
    faces = []
    for q in quads:
        faces.append([q[0], q[1], q[2]])
        faces.append([q[0], q[2], q[3]])
    return TriangleMesh(v, np.array(faces))


def cylinder_mesh(segments: int = 16) -> TriangleMesh:
    """Unit-radius cylinder along y, spanning y in [-1, 1]."""
    verts = []
    for y in (1.0, -1.0):
        for s in range(segments):
            theta = 2.0 * math.pi * s / segments
            verts.append([math.cos(theta), y, math.sin(theta)])
    top_center = len(verts)
    verts.append([0.0, 1.0, 0.0])
    bottom_center = len(verts)
    verts.append([0.0, -1.0, 0.0])
    faces = []
    for s in range(segments):
        s2 = (s + 1) % segments
        faces.append([s, s2, segments + s])
        faces.append([s2, segments + s2, segments + s])
        faces.append([top_center, s2, s])
        faces.append([bottom_center, segments + s, segments + s2])
    return TriangleMesh(np.array(verts), np.array(faces))
