import numpy as np
import pytest

from splatforge.geometry import Quat, TransformTRS, Vec3
from splatforge.splats import SH_REST_MAX, SplatCloud, sh_rest_count


def random_unit_quats(rng: np.random.Generator, n: int) -> np.ndarray:
    q = rng.normal(size=(n, 4))
    return q / np.linalg.norm(q, axis=1, keepdims=True)


def random_cloud(rng: np.random.Generator, n: int, sh_degree: int = 0) -> SplatCloud:
    k = sh_rest_count(sh_degree)
    sh_rest = np.zeros((n, SH_REST_MAX), dtype=np.float32)
    if k:
        sh_rest[:, :k] = rng.normal(scale=0.2, size=(n, k)).astype(np.float32)
    return SplatCloud(
        positions=rng.normal(scale=2.0, size=(n, 3)).astype(np.float32),
        rotations=random_unit_quats(rng, n).astype(np.float32),
        log_scales=rng.uniform(-3.0, -0.5, size=(n, 3)).astype(np.float32),
        opacity_logits=rng.uniform(-4.0, 4.0, size=n).astype(np.float32),
        colors_dc=rng.normal(scale=0.5, size=(n, 3)).astype(np.float32),
        sh_rest=sh_rest,
        sh_degree=sh_degree,
    )


def random_transform(rng: np.random.Generator) -> TransformTRS:
    q = random_unit_quats(rng, 1)[0]
    return TransformTRS(
        translation=Vec3(*rng.normal(scale=3.0, size=3)),
        rotation=Quat(*q),
        scale=float(rng.uniform(0.3, 3.0)),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
