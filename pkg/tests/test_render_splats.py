"""Splat projection and compositing against analytic and brute-force oracles."""

import math

import numpy as np
import pytest

from splatforge.geometry import Quat, TransformTRS, Vec3
from splatforge.render import (
    Camera,
    FootprintBatch,
    SplatFootprint,
    project_splat,
    render_splats,
    render_splats_float,
)
from splatforge.render.splat_raster import LOW_PASS_FLOOR_PX2
from splatforge.splats import GaussianSplat

from oracles import composite_reference

BG = (0.25, 0.25, 0.25)


def cam_256(width=256, height=256):
    return Camera(
        position=Vec3(0, 0, 0),
        rotation=Quat.identity(),
        fov_y=math.pi / 3,
        width=width,
        height=height,
        near=0.1,
        far=100.0,
    )


def splat_at(z, log_scale=-2.3, opacity=0.0):
    return GaussianSplat(
        position=Vec3(0, 0, z),
        rotation=Quat.identity(),
        log_scale=Vec3(log_scale, log_scale, log_scale),
        opacity_logit=opacity,
        color_dc=(0.0, 0.0, 0.0),
    )


def test_centered_splat_projects_to_image_center():
    fp = project_splat(cam_256(), splat_at(-5.0))
    assert fp is not None
    assert fp.mean2d == pytest.approx((128.0, 128.0))
    assert fp.depth == pytest.approx(5.0)


def test_behind_camera_and_beyond_far_absent():
    assert project_splat(cam_256(), splat_at(+5.0)) is None
    assert project_splat(cam_256(), splat_at(-200.0)) is None


def test_isotropic_splat_pixel_sigma_analytic():
    # sigma_px = 0.1 * (128 / tan 30deg) / 5 for a 0.1 m splat at 5 m, 60deg/256px
    fp = project_splat(cam_256(), splat_at(-5.0, log_scale=math.log(0.1)))
    f = 128.0 / math.tan(math.pi / 6)
    sigma_px = 0.1 * f / 5.0
    assert sigma_px == pytest.approx(4.4339, abs=1e-3)
    expected = sigma_px**2 * np.eye(2) + LOW_PASS_FLOOR_PX2 * np.eye(2)
    assert np.allclose(fp.cov2d, expected, atol=1e-9)
    assert fp.alpha_max == pytest.approx(0.5)  # sigmoid(0)


def test_object_transform_feeds_projection():
    t = TransformTRS(Vec3(0, 0, -5), Quat.identity(), 1.0)
    fp = project_splat(cam_256(), splat_at(0.0), t)
    assert fp is not None and fp.depth == pytest.approx(5.0)


def test_empty_render_is_background_and_inf():
    target = render_splats(cam_256(16, 16), [], background=BG)
    assert np.all(target.color == round(0.25 * 255))
    assert np.all(np.isinf(target.depth))


def test_centered_near_opaque_splat_hits_center_pixel_color():
    fp = SplatFootprint(
        mean2d=(8.0, 8.0),
        cov2d=np.array([[100.0, 0.0], [0.0, 100.0]]),
        depth=5.0,
        color=(1.0, 0.0, 0.0),
        alpha_max=0.999,
    )
    target = render_splats(cam_256(16, 16), [fp], background=BG)
    center = target.color[8, 8].astype(int)
    assert abs(center[0] - 255) <= 1
    assert center[1] <= 1 and center[2] <= 1


def random_footprints(rng, n, w, h):
    fps = []
    for _ in range(n):
        # random SPD 2x2: A A^T + small diagonal
        a = rng.normal(scale=1.5, size=(2, 2))
        cov = a @ a.T + np.eye(2) * rng.uniform(0.3, 2.0)
        fps.append(
            SplatFootprint(
                mean2d=(rng.uniform(0, w), rng.uniform(0, h)),
                cov2d=cov,
                depth=float(rng.uniform(1.0, 20.0)),
                color=tuple(rng.uniform(0, 1, size=3)),
                alpha_max=float(rng.uniform(0.05, 0.85)),
            )
        )
    return fps


def test_compositor_matches_brute_force(rng):
    for _ in range(30):
        n = int(rng.integers(1, 11))
        fps = random_footprints(rng, n, 16, 16)
        rgb, depth, _ = render_splats_float(16, 16, fps, background=BG)
        ref_rgb, ref_depth = composite_reference(16, 16, fps, BG)
        assert np.max(np.abs(rgb - ref_rgb)) < 1e-5
        both = np.isfinite(depth) & np.isfinite(ref_depth)
        assert np.array_equal(np.isfinite(depth), np.isfinite(ref_depth))
        assert np.max(np.abs(depth[both] - ref_depth[both])) < 1e-5


def test_transmittance_weight_bounded(rng):
    fps = random_footprints(rng, 10, 16, 16)
    _, _, transmittance = render_splats_float(16, 16, fps, background=BG)
    assert np.all(transmittance >= -1e-12)
    assert np.all(transmittance <= 1.0 + 1e-12)


def test_depth_tie_break_is_stable():
    mk = lambda color: SplatFootprint(
        mean2d=(4.0, 4.0),
        cov2d=np.eye(2) * 50.0,
        depth=3.0,
        color=color,
        alpha_max=0.8,
    )
    a = render_splats(cam_256(8, 8), [mk((1, 0, 0)), mk((0, 1, 0))], background=BG)
    b = render_splats(cam_256(8, 8), [mk((0, 1, 0)), mk((1, 0, 0))], background=BG)
    # equal depths resolve by input order, so swapping inputs swaps the result
    assert a.color[4, 4, 0] > a.color[4, 4, 1]
    assert b.color[4, 4, 1] > b.color[4, 4, 0]


def test_occluded_splat_depth_increase_is_invisible():
    front = [
        SplatFootprint((8.0, 8.0), np.eye(2) * 400.0, 1.0 + 0.1 * i, (0.9, 0.1, 0.1), 0.99)
        for i in range(5)
    ]  # transmittance after 5 layers: 1e-10, far below the 1e-4 cutoff

    def scene(back_depth):
        back = SplatFootprint((8.0, 8.0), np.eye(2) * 400.0, back_depth, (0, 0, 1), 0.8)
        return render_splats(cam_256(16, 16), front + [back], background=BG)

    a, b = scene(10.0), scene(20.0)
    assert np.array_equal(a.color, b.color)


def test_render_deterministic(rng):
    fps = random_footprints(rng, 10, 32, 32)
    a = render_splats(cam_256(32, 32), fps, background=BG)
    b = render_splats(cam_256(32, 32), fps, background=BG)
    assert np.array_equal(a.color, b.color)
    assert np.array_equal(a.depth, b.depth)


def test_resolution_equivariance_smooth_scene():
    # one soft splat: 2x render box-downsampled stays within 2/255 MAE of 1x
    base = splat_at(-5.0, log_scale=math.log(0.5), opacity=1.0)
    lo = render_splats(cam_256(32, 32), project_batch(cam_256(32, 32), base), background=BG)
    hi = render_splats(cam_256(64, 64), project_batch(cam_256(64, 64), base), background=BG)
    hi_f = hi.color.astype(np.float64).reshape(32, 2, 32, 2, 3).mean(axis=(1, 3))
    mae = np.abs(hi_f - lo.color.astype(np.float64)).mean() / 255.0
    assert mae < 2.0 / 255.0


def project_batch(cam, splat) -> FootprintBatch:
    fp = project_splat(cam, splat)
    return FootprintBatch.from_footprints([fp] if fp else [])
