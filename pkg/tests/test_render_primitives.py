"""Primitive ray tracing against a scalar reference tracer."""

import math

import numpy as np

from splatforge.geometry import Quat, TransformTRS, Vec3
from splatforge.meshio import cube_mesh
from splatforge.render import Camera, SurfaceBuffer, render_primitives
from splatforge.scene import Primitive, PrimitiveShape

from conftest import random_unit_quats
from oracles import trace_surfaces_reference

BG = (0.25, 0.25, 0.25)


def cam(width=65, height=65, pos=(0, 0, 0), rot=None):
    return Camera(
        position=Vec3(*pos),
        rotation=rot or Quat.identity(),
        fov_y=math.pi / 3,
        width=width,
        height=height,
        near=0.1,
        far=100.0,
    )


def prim(shape, t=(0, 0, 0), r=None, s=1.0):
    return Primitive(shape, TransformTRS(Vec3(*t), r or Quat.identity(), s))


def test_empty_arrangement_is_background():
    target = render_primitives(cam(16, 16), [])
    assert np.all(target.color == round(0.25 * 255))
    assert np.all(np.isinf(target.depth))


def test_unit_sphere_center_depth_exactly_four():
    # odd resolution puts the center pixel ray exactly on the optical axis
    target = render_primitives(cam(65, 65), [prim(PrimitiveShape.SPHERE, t=(0, 0, -5))])
    assert target.depth[32, 32] == 4.0


def test_cube_in_front_of_sphere_nearest_hit():
    prims = [
        prim(PrimitiveShape.SPHERE, t=(0, 0, -8), s=1.5),
        prim(PrimitiveShape.CUBE, t=(0, 0, -4), s=0.8),
    ]
    target = render_primitives(cam(33, 33), prims)
    assert target.depth[16, 16] == np.float64(4.0 - 0.8)

    shapes = [(p.shape.value, p.transform) for p in prims]
    ref_rgb, ref_depth = trace_surfaces_reference(cam(33, 33), shapes, BG)
    both = np.isfinite(target.depth) & np.isfinite(ref_depth)
    assert np.array_equal(np.isfinite(target.depth), np.isfinite(ref_depth))
    assert np.max(np.abs(target.depth[both] - ref_depth[both])) < 1e-9


def test_random_two_primitive_scenes_match_reference(rng):
    shapes_pool = [PrimitiveShape.SPHERE, PrimitiveShape.CUBE, PrimitiveShape.CYLINDER]
    for _ in range(15):
        prims = []
        for _ in range(2):
            q = Quat(*random_unit_quats(rng, 1)[0])
            prims.append(
                prim(
                    shapes_pool[int(rng.integers(3))],
                    t=(rng.uniform(-2, 2), rng.uniform(-1.5, 1.5), rng.uniform(-9, -4)),
                    r=q,
                    s=float(rng.uniform(0.4, 1.6)),
                )
            )
        c = cam(24, 24)
        target = render_primitives(c, prims)
        ref_rgb, ref_depth = trace_surfaces_reference(
            c, [(p.shape.value, p.transform) for p in prims], BG
        )
        assert np.array_equal(np.isfinite(target.depth), np.isfinite(ref_depth))
        both = np.isfinite(ref_depth)
        assert np.max(np.abs(target.depth[both] - ref_depth[both])) < 1e-7 if both.any() else True
        ref_u8 = np.clip(np.rint(ref_rgb * 255), 0, 255).astype(int)
        assert np.max(np.abs(target.color.astype(int) - ref_u8)) <= 1


def test_arrangement_transform_composes():
    arrangement_t = TransformTRS(Vec3(0, 0, -5), Quat.identity(), 2.0)
    # local unit sphere at origin, scaled 2x and pushed 5 m out
    target = render_primitives(cam(65, 65), [prim(PrimitiveShape.SPHERE)], arrangement_t)
    assert target.depth[32, 32] == 3.0


def test_depth_respects_near_far(rng):
    prims = [prim(PrimitiveShape.CUBE, t=(0, 0, -3), s=1.0)]
    target = render_primitives(cam(33, 33), prims)
    hits = np.isfinite(target.depth)
    assert np.all(target.depth[hits] >= 0.1)
    assert np.all(target.depth[hits] <= 100.0)


def test_mesh_matches_analytic_cube():
    # the tessellated cube must trace identically to the analytic one
    c = cam(33, 33)
    t = TransformTRS(Vec3(0.3, -0.2, -5), Quat.from_axis_angle(Vec3(0, 1, 0), 0.4), 0.9)

    analytic = render_primitives(c, [Primitive(PrimitiveShape.CUBE, t)])

    buf = SurfaceBuffer(c)
    mesh = cube_mesh().transformed(t.rotation.to_matrix(), t.translation.to_array(), t.scale)
    buf.add_mesh(mesh)
    meshed = buf.into_target(BG)

    both = np.isfinite(analytic.depth) & np.isfinite(meshed.depth)
    # allow edge pixels to differ (triangulated silhouette), interiors must agree
    assert both.sum() > 0.9 * np.isfinite(analytic.depth).sum()
    assert np.max(np.abs(analytic.depth[both] - meshed.depth[both])) < 1e-6
    assert np.max(np.abs(analytic.color[both].astype(int) - meshed.color[both].astype(int))) <= 1
