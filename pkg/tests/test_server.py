"""HTTP facade and event stream."""

import json
import queue
import threading
import time

import httpx
import pytest
import uvicorn
from fastapi.testclient import TestClient

from splatforge.assets import AssetStore
from splatforge.backends import MockBackend
from splatforge.broker import Broker, BrokerConfig
from splatforge.ply import write_ply
from splatforge.scene import deserialize_scene
from splatforge.server import EventHub, create_app

from conftest import random_cloud


class ServerThread:
    """Real uvicorn server on an ephemeral port (TestClient buffers whole
    responses, so endless SSE streams need an actual socket)."""

    def __init__(self, app):
        config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="error")
        self.server = uvicorn.Server(config)
        self.thread = threading.Thread(target=self.server.run, daemon=True)

    def __enter__(self) -> str:
        self.thread.start()
        deadline = time.monotonic() + 10
        while not self.server.started:
            if time.monotonic() > deadline:
                raise RuntimeError("server did not start")
            time.sleep(0.01)
        port = self.server.servers[0].sockets[0].getsockname()[1]
        return f"http://127.0.0.1:{port}"

    def __exit__(self, *exc):
        self.server.should_exit = True
        self.thread.join(timeout=5)

CAM32 = {"position": [0, 1, 4], "rotation": [1, 0, 0, 0], "width": 32, "height": 32}


@pytest.fixture
def client(rng):
    store = AssetStore()
    broker = Broker(MockBackend(), store, config=BrokerConfig(online_workers=2))
    app = create_app(broker)
    cloud = random_cloud(rng, 15)
    asset = store.put(write_ply(cloud), "application/octet-stream")
    with TestClient(app) as tc:
        tc.asset = asset
        tc.broker = broker
        yield tc
    broker.shutdown()


def add_splat(client):
    r = client.post(
        "/instructions",
        json={"type": "add_asset", "object_type": "splat", "params": {"asset": client.asset}},
    )
    assert r.status_code == 200
    return r.json()


def test_scene_round_trip(client):
    add_splat(client)
    r = client.get("/scene")
    assert r.status_code == 200
    scene = deserialize_scene(r.content)
    assert len(scene.objects) == 1


def test_instruction_flow_and_job_endpoints(client):
    add_splat(client)
    obj_id = deserialize_scene(client.get("/scene").content).objects[0].id

    r = client.post(
        "/instructions",
        json={"type": "edit_object", "object_id": obj_id, "prompt": "make it grey"},
    )
    job_id = r.json()["job_id"]
    assert job_id is not None

    client.broker.wait_settled(job_id)
    job = client.get(f"/jobs/{job_id}").json()
    assert job["state"] == "proxy_ready"
    assert len(job["variants"]) == 3

    r = client.post(f"/jobs/{job_id}/variant", json={"index": 2})
    assert r.json()["state"] == "offline_queued"
    assert r.json()["selected_variant"] == 2

    r = client.post("/offline/run")
    assert r.json()["processed"] == 1
    assert client.get(f"/jobs/{job_id}").json()["state"] == "completed"

    jobs = client.get("/jobs").json()
    assert len(jobs) == 1


def test_error_shapes(client):
    r = client.get("/jobs/nope")
    assert r.status_code == 404
    assert set(r.json()) == {"code", "message"}

    r = client.post(
        "/instructions", json={"type": "delete", "object_id": "missing"}
    )
    assert r.status_code == 404
    assert r.json()["code"] == "ObjectNotFound"

    r = client.post("/instructions", json={"type": "move"})
    assert r.status_code == 400


def test_asset_media_types(client):
    r = client.get(f"/assets/{client.asset}")
    assert r.status_code == 200
    assert r.headers["content-type"].startswith("application/octet-stream")
    assert r.content.startswith(b"ply")
    assert client.get("/assets/absent").status_code == 404


def test_snapshot_endpoint(client):
    r = client.post("/snapshot", json={"camera": CAM32, "prompt": "sunrise"})
    job_id = r.json()["job_id"]
    client.broker.wait_settled(job_id)
    job = client.get(f"/jobs/{job_id}").json()
    assert job["kind"] == "image_stylize"

    r = client.post("/snapshot", json={"camera": CAM32, "prompt": ""})
    assert r.status_code == 400


def test_event_stream_orders_and_reports(rng):
    store = AssetStore()
    broker = Broker(MockBackend(), store, config=BrokerConfig())
    asset = store.put(write_ply(random_cloud(rng, 10)), "application/octet-stream")
    app = create_app(broker)
    with ServerThread(app) as base:
        events = []

        def listen():
            with httpx.stream("GET", f"{base}/events?limit=3", timeout=10) as stream:
                for line in stream.iter_lines():
                    if line.startswith("data: "):
                        events.append(json.loads(line[len("data: "):]))

        listener = threading.Thread(target=listen, daemon=True)
        listener.start()
        time.sleep(0.3)  # let the subscription attach
        httpx.post(
            f"{base}/instructions",
            json={"type": "add_asset", "object_type": "splat", "params": {"asset": asset}},
        )
        httpx.post(
            f"{base}/instructions",
            json={
                "type": "generate_prompt",
                "prompt": "a chair",
                "transform": {"t": [0, 0, 0], "r": [1, 0, 0, 0], "s": 1},
            },
        )
        listener.join(timeout=10)
        assert not listener.is_alive()
    broker.shutdown()

    assert len(events) == 3
    kinds = [e["kind"] for e in events]
    assert "scene_changed" in kinds
    seqs = [e["seq"] for e in events]
    assert seqs == sorted(seqs)


def test_every_mutation_emits_exactly_one_scene_event(client):
    hub: EventHub = client.app.state.hub
    q = hub.subscribe()
    add_splat(client)
    obj_id = deserialize_scene(client.get("/scene").content).objects[0].id
    client.post(
        "/instructions",
        json={
            "type": "move",
            "object_id": obj_id,
            "transform": {"t": [1, 0, 0], "r": [1, 0, 0, 0], "s": 1},
        },
    )
    time.sleep(0.05)
    scene_events = []
    while True:
        try:
            message = q.get_nowait()
        except queue.Empty:
            break
        if message["kind"] == "scene_changed":
            scene_events.append(message)
    assert len(scene_events) == 2  # one per mutation
    hub.unsubscribe(q)


def test_slow_subscriber_disconnected_without_blocking():
    hub = EventHub()
    slow = hub.subscribe(buffer_size=8)  # stalls: never drained
    fast = hub.subscribe()
    for i in range(50):
        hub.publish("scene_changed", {"i": i})
    assert hub.is_closed(slow)
    assert not hub.is_closed(fast)
    assert hub.subscriber_count == 1
    # the healthy subscriber saw every message, in order
    received = []
    while True:
        try:
            received.append(fast.get_nowait())
        except queue.Empty:
            break
    assert [m["payload"]["i"] for m in received] == list(range(50))


def test_scene_get_responds_during_offline_run(client, rng):
    add_splat(client)
    obj_id = deserialize_scene(client.get("/scene").content).objects[0].id
    client.broker.backend = MockBackend(
        delays={k: 0.0 for k in ()}  # online instant
    )
    r = client.post(
        "/instructions",
        json={"type": "edit_object", "object_id": obj_id, "prompt": "slow edit"},
    )
    job_id = r.json()["job_id"]
    client.broker.wait_settled(job_id)
    client.post(f"/jobs/{job_id}/variant", json={"index": 0})

    from splatforge.backends import ModuleKind

    client.broker.backend = MockBackend(delays={ModuleKind.SPLAT_EDIT: 1.0})
    done = threading.Event()

    def offline():
        client.post("/offline/run")
        done.set()

    t = threading.Thread(target=offline, daemon=True)
    t.start()
    time.sleep(0.2)  # offline job is now sleeping in the backend
    start = time.perf_counter()
    r = client.get("/scene")
    elapsed = time.perf_counter() - start
    assert r.status_code == 200
    assert elapsed < 0.5
    assert done.wait(10.0)
