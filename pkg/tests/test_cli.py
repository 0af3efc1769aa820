"""CLI subcommands end to end (mock backend, temp dirs)."""

import json

import numpy as np
import pytest

from splatforge.cli import main
from splatforge.ply import write_ply
from splatforge.render.images import parse_pgm16_codes, parse_ppm
from splatforge.scene import ObjectKindTag, deserialize_scene

from conftest import random_cloud
from session_builder import SNAP_CAM, build_demo_session


@pytest.fixture
def workdir(tmp_path, rng):
    ply = tmp_path / "cat.ply"
    ply.write_bytes(write_ply(random_cloud(rng, 30)))
    cam = tmp_path / "cam.json"
    cam.write_text(json.dumps(SNAP_CAM))
    return tmp_path


def test_import_creates_splat_object(workdir):
    scene_path = workdir / "s.json"
    code = main(["import", str(workdir / "cat.ply"), "--scene", str(scene_path),
                 "--at", "0,0,0"])
    assert code == 0
    scene = deserialize_scene(scene_path.read_bytes())
    assert len(scene.objects) == 1
    assert scene.objects[0].kind.tag == ObjectKindTag.SPLAT
    assert (workdir / "assets").is_dir()


def test_render_empty_scene_is_background(workdir):
    scene_path = workdir / "s.json"
    scene_path.write_text('{"initial_scene_ref":null,"next_seq":0,"objects":[]}')
    out = workdir / "img.ppm"
    depth = workdir / "d.pgm"
    code = main(["render", "--scene", str(scene_path), "--camera", str(workdir / "cam.json"),
                 "--out", str(out), "--depth", str(depth)])
    assert code == 0
    img = parse_ppm(out.read_bytes())
    assert img.shape == (64, 64, 3)
    assert np.all(img == img[0, 0])  # uniform background
    codes = parse_pgm16_codes(depth.read_bytes())
    assert np.all(codes == 65535)  # +inf sentinel everywhere


def test_replay_deterministic_and_offline_split(tmp_path):
    session = build_demo_session(tmp_path)
    outs = []
    for name in ("final_a.json", "final_b.json"):
        code = main([
            "replay", "--scene", str(session["scene"]), "--log", str(session["log"]),
            "--backend", "mock", "--auto-select", "0", "--seed", "7",
            "--out", str(tmp_path / name),
        ])
        assert code == 0
        outs.append((tmp_path / name).read_bytes())
    assert outs[0] == outs[1]

    # split workflow: replay --skip-offline, then offline, same final bytes
    mid = tmp_path / "mid.json"
    code = main([
        "replay", "--scene", str(session["scene"]), "--log", str(session["log"]),
        "--backend", "mock", "--auto-select", "0", "--seed", "7",
        "--out", str(mid), "--skip-offline",
    ])
    assert code == 0
    mid_scene = deserialize_scene(mid.read_bytes())
    assert any(o.kind.tag in (ObjectKindTag.PROXY2D, ObjectKindTag.PROXY3D)
               for o in mid_scene.objects)

    final_split = tmp_path / "final_split.json"
    code = main([
        "offline", "--scene", str(session["scene"]), "--log", str(session["log"]),
        "--backend", "mock", "--auto-select", "0", "--seed", "7",
        "--out", str(final_split),
    ])
    assert code == 0
    assert final_split.read_bytes() == outs[0]

    final = deserialize_scene(outs[0])
    lamp = final.find(session["lamp_id"])
    assert lamp.kind.tag == ObjectKindTag.MESH
    assert lamp.transform.translation.x == 4.0  # mid-run move preserved


def test_snapshot_one_shot(workdir):
    scene_path = workdir / "s.json"
    main(["import", str(workdir / "cat.ply"), "--scene", str(scene_path)])
    out = workdir / "styled.ppm"
    code = main(["snapshot", "--scene", str(scene_path), "--camera", str(workdir / "cam.json"),
                 "--prompt", "warm evening light", "--out", str(out), "--seed", "3"])
    assert code == 0
    img = parse_ppm(out.read_bytes())
    assert img.shape == (64, 64, 3)


def test_usage_and_runtime_exit_codes(workdir):
    assert main(["frobnicate"]) == 1  # unknown subcommand
    assert main(["render", "--scene", "s.json"]) == 1  # missing required flags
    bad_ply = workdir / "bad.ply"
    bad_ply.write_bytes(b"plz not a ply")
    assert main(["import", str(bad_ply), "--scene", str(workdir / "s.json")]) == 2
    assert main([
        "replay", "--scene", str(workdir / "s.json"), "--log", str(workdir / "missing.jsonl"),
    ]) == 2
