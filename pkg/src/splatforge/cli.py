"""Headless entry points.

Subcommands:
  serve     run the HTTP/event-stream server
  import    add a splat PLY to a scene as a new object
  render    snapshot a scene to color PPM (+ optional 16-bit depth PGM)
  replay    run an edit log through the broker with deterministic backends
  offline   complete the offline queue for a logged session
  snapshot  one-shot magic camera: scene + camera + prompt -> stylized image

Every subcommand is scriptable (no prompts). A JSON config file can provide
defaults; flags win. Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .assets import AssetStore
from .backends import BackendFailure, HttpBackend, MockBackend
from .broker import Broker, BrokerConfig, replay_session
from .ply import PlyError, parse_ply
from .render import Camera, compose_snapshot, write_pgm16, write_ppm
from .scene import (
    InstructionType,
    ObjectKindTag,
    Scene,
    SceneError,
    deserialize_scene,
    read_edit_log,
    serialize_scene,
    transform_from_json,
)


class CliError(Exception):
    pass


def load_config(path: str | None) -> dict:
    if not path:
        return {}
    return json.loads(Path(path).read_text())


def make_backend(spec: str):
    if spec == "mock":
        return MockBackend()
    if spec.startswith("http://") or spec.startswith("https://"):
        return HttpBackend(spec)
    raise CliError(f"unknown backend {spec!r}; use 'mock' or an http(s) URL")


def broker_config(args, cfg: dict) -> BrokerConfig:
    section = dict(cfg.get("broker", {}))
    config = BrokerConfig(
        online_workers=int(section.get("online_workers", 2)),
        online_timeout=float(section.get("online_timeout", 30.0)),
        offline_timeout=float(section.get("offline_timeout", 1800.0)),
        auto_select=section.get("auto_select"),
        base_seed=int(section.get("base_seed", 0)),
    )
    if getattr(args, "auto_select", None) is not None:
        config.auto_select = args.auto_select
    elif config.auto_select is None:
        config.auto_select = 0  # headless runs must finish without interaction
    if getattr(args, "seed", None) is not None:
        config.base_seed = args.seed
    config.validate()
    return config


def load_scene(path: str) -> Scene:
    p = Path(path)
    if not p.exists():
        return Scene()
    return deserialize_scene(p.read_bytes())


def default_assets_dir(scene_path: str, override: str | None) -> Path:
    if override:
        return Path(override)
    return Path(scene_path).parent / "assets"


def load_camera(path: str) -> Camera:
    return Camera.from_json_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------


def cmd_import(args) -> int:
    store = AssetStore(default_assets_dir(args.scene, args.assets))
    data = Path(args.ply).read_bytes()
    parse_ply(data)  # validate before committing anything
    asset_id = store.put(data, "application/octet-stream")

    scene = load_scene(args.scene)
    fields: dict = {"object_type": ObjectKindTag.SPLAT, "params": {"asset": asset_id}}
    if args.at is not None:
        x, y, z = (float(v) for v in args.at.split(","))
        fields["transform"] = transform_from_json(
            {"t": [x, y, z], "r": [1, 0, 0, 0], "s": args.scale}
        )
    broker = Broker(MockBackend(), store, scene=scene)
    instr = broker.make_instruction(InstructionType.ADD_ASSET, **fields)
    broker.submit_instruction(instr)
    Path(args.scene).write_bytes(serialize_scene(broker.scene))
    broker.shutdown()
    print(f"imported {args.ply} as object {instr.id}")
    return 0


def cmd_render(args) -> int:
    store = AssetStore(default_assets_dir(args.scene, args.assets))
    scene = load_scene(args.scene)
    cam = load_camera(args.camera)
    target = compose_snapshot(scene, cam, store)
    Path(args.out).write_bytes(write_ppm(target.color))
    if args.depth:
        Path(args.depth).write_bytes(write_pgm16(target.depth, cam.near, cam.far))
    print(f"rendered {cam.width}x{cam.height} -> {args.out}")
    return 0


def _replay(args, cfg: dict, run_offline: bool) -> int:
    store = AssetStore(default_assets_dir(args.scene, args.assets))
    initial = load_scene(args.scene)
    log = read_edit_log(Path(args.log).read_bytes())
    config = broker_config(args, cfg)
    if not run_offline:
        # settle online phases only; leave jobs queued
        broker = Broker(make_backend(args.backend), store, scene=initial, config=config)
        try:
            for instr in log.instructions:
                job_id, _ = broker.submit_instruction(instr)
                if job_id is not None:
                    broker.wait_settled(job_id, timeout=config.online_timeout + 5)
        finally:
            broker.shutdown()
    else:
        broker = replay_session(
            list(log.instructions),
            make_backend(args.backend),
            store,
            initial=initial,
            config=config,
        )
    out = Path(args.out) if args.out else Path(args.scene)
    out.write_bytes(serialize_scene(broker.scene))
    if args.events:
        lines = [json.dumps(ev, sort_keys=True) for ev in broker.job_events]
        Path(args.events).write_text("\n".join(lines) + ("\n" if lines else ""))
    states = [j.state.value for j in broker.jobs.values()]
    print(f"replayed {len(log.instructions)} instructions, {len(states)} jobs "
          f"({', '.join(sorted(set(states))) or 'none'}) -> {out}")
    return 0


def cmd_replay(args) -> int:
    cfg = load_config(args.config)
    return _replay(args, cfg, run_offline=not args.skip_offline)


def cmd_offline(args) -> int:
    # with deterministic backends the (instant) online phase reconstructs job
    # state from the log, after which the offline queue runs to completion
    cfg = load_config(args.config)
    return _replay(args, cfg, run_offline=True)


def cmd_snapshot(args) -> int:
    cfg = load_config(args.config)
    store = AssetStore(default_assets_dir(args.scene, args.assets))
    scene = load_scene(args.scene)
    cam = load_camera(args.camera)
    config = broker_config(args, cfg)
    if args.variant is not None:
        config.auto_select = args.variant
    broker = Broker(make_backend(args.backend), store, scene=scene, config=config)
    try:
        job_id = broker.magic_camera_snapshot(cam, args.prompt)
        broker.wait_settled(job_id, timeout=config.online_timeout + 5)
        broker.run_offline_once()
        job = broker.jobs[job_id]
        if job.error:
            raise CliError(f"stylization failed: {job.error}")
        panel = broker.scene.find(job.target_object_id)
        Path(args.out).write_bytes(store.get(panel.kind.asset))
    finally:
        broker.shutdown()
    print(f"stylized snapshot -> {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    cfg = load_config(args.config)
    store = AssetStore(default_assets_dir(args.scene, args.assets))
    scene = load_scene(args.scene)
    config = broker_config(args, cfg)
    if getattr(args, "auto_select", None) is None and "auto_select" not in cfg.get("broker", {}):
        config.auto_select = None  # interactive sessions select variants themselves
    broker = Broker(make_backend(args.backend), store, scene=scene, config=config)
    app = create_app(broker, static_dir=args.ui)
    port = args.port if args.port is not None else int(cfg.get("port", 8000))
    uvicorn.run(app, host=args.host, port=port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="splatforge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, backend=True):
        p.add_argument("--scene", required=True, help="scene JSON path")
        p.add_argument("--assets", help="asset directory (default: <scene dir>/assets)")
        p.add_argument("--config", help="JSON config file; flags win")
        if backend:
            p.add_argument("--backend", default="mock", help="'mock' or a model-server URL")
            p.add_argument("--seed", type=int, help="base seed for all jobs in this run")

    p = sub.add_parser("import", help="add a splat PLY to the scene")
    p.add_argument("ply", help="binary PLY file")
    common(p, backend=False)
    p.add_argument("--at", help="placement x,y,z (omit to snap to ground)")
    p.add_argument("--scale", type=float, default=1.0)
    p.set_defaults(func=cmd_import)

    p = sub.add_parser("render", help="render a scene snapshot")
    common(p, backend=False)
    p.add_argument("--camera", required=True, help="camera JSON path")
    p.add_argument("--out", required=True, help="output PPM path")
    p.add_argument("--depth", help="optional output 16-bit PGM depth path")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("replay", help="replay an edit log")
    common(p)
    p.add_argument("--log", required=True, help="edits.jsonl path")
    p.add_argument("--out", help="final scene JSON (default: overwrite --scene)")
    p.add_argument("--events", help="write the job event log (JSONL) here")
    p.add_argument("--auto-select", dest="auto_select", type=int, choices=(0, 1, 2))
    p.add_argument("--skip-offline", action="store_true",
                   help="stop after previews; finish later with 'offline'")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("offline", help="run the offline queue for a logged session")
    common(p)
    p.add_argument("--log", required=True, help="edits.jsonl path")
    p.add_argument("--out", help="final scene JSON (default: overwrite --scene)")
    p.add_argument("--events", help="write the job event log (JSONL) here")
    p.add_argument("--auto-select", dest="auto_select", type=int, choices=(0, 1, 2))
    p.set_defaults(func=cmd_offline)

    p = sub.add_parser("snapshot", help="magic-camera one-shot stylization")
    common(p)
    p.add_argument("--camera", required=True, help="camera JSON path")
    p.add_argument("--prompt", required=True)
    p.add_argument("--out", required=True, help="stylized image output (PPM)")
    p.add_argument("--variant", type=int, choices=(0, 1, 2), help="which variant to keep")
    p.set_defaults(func=cmd_snapshot)

    p = sub.add_parser("serve", help="run the HTTP server")
    common(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int)
    p.add_argument("--auto-select", dest="auto_select", type=int, choices=(0, 1, 2))
    p.add_argument("--ui", help="serve a built web client (frontend dir) at /")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 1
    try:
        return args.func(args)
    except (CliError, SceneError, PlyError, BackendFailure, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
