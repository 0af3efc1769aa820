"""Scripted 50-instruction editing session used by CLI and acceptance tests.

Everything is seeded and content-addressed, so two builds of the same session
are byte-identical: splat assets from a fixed generator seed, instruction ids
by index, a camera dict with explicit size. The session covers every
instruction type, includes a mid-run move of a generation proxy, and a
re-selection while a job is already queued.
"""

import json
from pathlib import Path

import numpy as np

from splatforge.assets import AssetStore
from splatforge.ply import write_ply
from splatforge.scene import (
    EditInstruction,
    EditLog,
    InstructionType,
    ObjectKindTag,
    write_edit_log,
)

from conftest import random_cloud

SNAP_CAM = {
    "position": [0.0, 1.5, 6.0],
    "rotation": [1.0, 0.0, 0.0, 0.0],
    "fov_y": 1.0471975511965976,
    "width": 64,
    "height": 64,
    "near": 0.1,
    "far": 100.0,
}


def _t(t=(0.0, 0.0, 0.0), s=1.0):
    return {"t": list(t), "r": [1.0, 0.0, 0.0, 0.0], "s": s}


def _instr(seq, type_, **kw):
    return EditInstruction(
        id=f"sess-{seq:04d}",
        seq=seq,
        timestamp_ms=1_700_000_000_000 + seq,
        type=type_,
        **kw,
    )


def build_demo_session(root: Path) -> dict:
    """Writes scene.json, assets/, edits.jsonl under `root`; returns paths."""
    root = Path(root)
    assets_dir = root / "assets"
    store = AssetStore(assets_dir)
    gen = np.random.default_rng(41)
    sofa_asset = store.put(write_ply(random_cloud(gen, 60)), "application/octet-stream")
    chair_asset = store.put(write_ply(random_cloud(gen, 40)), "application/octet-stream")

    from splatforge.scene import transform_from_json

    arrangement = [
        {"shape": "cube", "transform": _t((0.0, 0.5, 0.0), 0.5)},
        {"shape": "cube", "transform": _t((0.0, 1.2, 0.0), 0.3)},
        {"shape": "cylinder", "transform": _t((0.35, 1.5, 0.0), 0.1)},
    ]

    instrs = [
        _instr(0, InstructionType.ADD_ASSET, object_type=ObjectKindTag.SPLAT,
               params={"asset": sofa_asset}),
        _instr(1, InstructionType.ADD_ASSET, object_type=ObjectKindTag.SPLAT,
               transform=transform_from_json(_t((2.0, 0.0, -1.0))),
               params={"asset": chair_asset}),
    ]
    sofa_id, chair_id = "sess-0000", "sess-0001"

    mover = np.random.default_rng(7)

    def move(seq, object_id):
        return _instr(
            seq, InstructionType.MOVE, object_id=object_id,
            transform=transform_from_json(
                _t(tuple(float(x) for x in mover.normal(scale=1.5, size=3)),
                   float(mover.uniform(0.6, 1.6)))
            ),
        )

    instrs += [move(2, sofa_id), move(3, chair_id), move(4, sofa_id)]
    instrs.append(_instr(5, InstructionType.EDIT_OBJECT, object_id=sofa_id,
                         prompt="make the sofa blue"))
    instrs.append(move(6, chair_id))
    lamp_id = "sess-0007"
    instrs.append(_instr(7, InstructionType.GENERATE_PROMPT,
                         prompt="Make an ornate brass lamp",
                         transform=transform_from_json(_t((2.0, 0.0, -1.0)))))
    # mid-run move: the lamp proxy is repositioned while its job waits offline
    instrs.append(_instr(8, InstructionType.MOVE, object_id=lamp_id,
                         transform=transform_from_json(_t((4.0, 0.0, -2.0), 1.25))))
    house_id = "sess-0009"
    instrs.append(_instr(9, InstructionType.ADD_ASSET,
                         object_type=ObjectKindTag.PRIMITIVE_ARRANGEMENT,
                         transform=transform_from_json(_t((-2.0, 0.0, -2.0))),
                         params={"primitives": arrangement}))
    instrs.append(_instr(10, InstructionType.GENERATE_SCULPT, object_id=house_id,
                         prompt="gingerbread house"))
    instrs.append(_instr(11, InstructionType.MAGIC_CAMERA,
                         prompt="realistic apartment living room",
                         params={"camera": dict(SNAP_CAM)}))
    dup_id_src = "sess-0012"
    instrs.append(_instr(12, InstructionType.DUPLICATE, object_id=chair_id))
    # re-pick the sofa edit variant while its job is already offline-queued
    instrs.append(_instr(13, InstructionType.EDIT_OBJECT, object_id=sofa_id,
                         selected_variant=1))
    instrs.append(_instr(14, InstructionType.GENERATE_PROMPT, prompt="snowy tree",
                         transform=transform_from_json(_t((-4.0, 0.0, 1.0)))))
    from splatforge.scene import duplicate_object_id

    instrs.append(_instr(15, InstructionType.DELETE,
                         object_id=duplicate_object_id(dup_id_src)))

    # the lamp stays put after its mid-run move so the final transform is known
    targets = [sofa_id, chair_id, house_id, "sess-0014"]
    seq = 16
    instrs.append(_instr(seq, InstructionType.EDIT_OBJECT, object_id=chair_id,
                         prompt="make it retro"))
    seq += 1
    while seq < 50:
        instrs.append(move(seq, targets[seq % len(targets)]))
        seq += 1
    assert len(instrs) == 50

    log_path = root / "edits.jsonl"
    log_path.write_bytes(write_edit_log(EditLog(tuple(instrs))))
    scene_path = root / "scene.json"
    scene_path.write_text('{"initial_scene_ref":null,"next_seq":0,"objects":[]}')
    cam_path = root / "camera.json"
    cam_path.write_text(json.dumps(SNAP_CAM))
    return {
        "scene": scene_path,
        "log": log_path,
        "assets": assets_dir,
        "camera": cam_path,
        "sofa_asset": sofa_asset,
        "lamp_id": lamp_id,
        "instructions": instrs,
    }
