"""HTTP + server-sent-events facade over the broker.

All writes funnel through the broker's single writer; reads serve immutable
scene snapshots, so GET /scene never exposes a half-applied instruction. The
event stream is one-way: every scene mutation is one `scene_changed` event,
every job transition one `job_state_changed`, every new asset one
`asset_added`. Slow consumers are disconnected once their buffer overflows
rather than ever blocking the publisher.
"""

from __future__ import annotations

import json
import queue
import threading
import uuid

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response, StreamingResponse

from .assets import MissingAsset
from .backends import BackendFailure, EmptyPrompt
from .broker import BadIndex, Broker, BrokerErrorBase, JobNotFound, WrongState
from .geometry import NonPositiveScale
from .scene import (
    MalformedInstruction,
    ObjectNotFound,
    SceneError,
    StaleVariant,
    instruction_from_json,
    serialize_scene,
)

EVENT_BUFFER = 1024


class EventHub:
    """Fan-out of EventMessage dicts {seq, kind, payload} to bounded queues."""

    def __init__(self, buffer_size: int = EVENT_BUFFER):
        self.buffer_size = buffer_size
        self._seq = 0
        self._lock = threading.Lock()
        self._subscribers: list[queue.Queue] = []

    def publish(self, kind: str, payload: dict) -> None:
        with self._lock:
            self._seq += 1
            message = {"seq": self._seq, "kind": kind, "payload": payload}
            dead = []
            for q in self._subscribers:
                try:
                    q.put_nowait(message)
                except queue.Full:
                    dead.append(q)  # slow consumer: drop it, never block
            for q in dead:
                self._subscribers.remove(q)
                q.put_nowait_closed = True  # type: ignore[attr-defined]

    def subscribe(self, buffer_size: int | None = None) -> queue.Queue:
        q: queue.Queue = queue.Queue(maxsize=buffer_size or self.buffer_size)
        with self._lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def is_closed(self, q: queue.Queue) -> bool:
        return getattr(q, "put_nowait_closed", False)

    @property
    def subscriber_count(self) -> int:
        with self._lock:
            return len(self._subscribers)


_STATUS_BY_ERROR = [
    (ObjectNotFound, 404),
    (JobNotFound, 404),
    (MissingAsset, 404),
    (WrongState, 409),
    (StaleVariant, 409),
    (BadIndex, 400),
    (EmptyPrompt, 400),
    (MalformedInstruction, 400),
    (BackendFailure, 502),
    (SceneError, 400),
]


def _status_for(error: Exception) -> int:
    for cls, status in _STATUS_BY_ERROR:
        if isinstance(error, cls):
            return status
    return 500


def create_app(
    broker: Broker, hub: EventHub | None = None, static_dir: str | None = None
) -> FastAPI:
    app = FastAPI(title="splatforge", docs_url=None, redoc_url=None)
    hub = hub if hub is not None else EventHub()
    app.state.broker = broker
    app.state.hub = hub

    broker.add_listener(lambda kind, payload: hub.publish(kind, payload))
    broker.assets.listeners.append(
        lambda asset_id, media: hub.publish(
            "asset_added", {"asset_id": asset_id, "media_type": media}
        )
    )

    async def handle_error(request: Request, error: Exception):
        return JSONResponse(
            status_code=_status_for(error),
            content={"code": type(error).__name__, "message": str(error)},
        )

    # domain errors map to {code, message}; anything else stays a plain 500
    for base in (SceneError, BrokerErrorBase, BackendFailure, MissingAsset,
                 NonPositiveScale, ValueError):
        app.add_exception_handler(base, handle_error)

    @app.get("/scene")
    def get_scene():
        return Response(content=serialize_scene(broker.scene), media_type="application/json")

    @app.post("/instructions")
    async def post_instruction(request: Request):
        body = await request.json()
        body.setdefault("id", str(uuid.uuid4()))
        body.setdefault("seq", broker.scene.next_seq)
        body.setdefault("timestamp_ms", _now_ms())
        instr = instruction_from_json(body)
        job_id, applied = broker.submit_instruction(instr)
        return {"job_id": job_id, "applied": applied}

    @app.get("/jobs")
    def list_jobs():
        return [job.to_json() for job in broker.jobs.values()]

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        job = broker.jobs.get(job_id)
        if job is None:
            raise JobNotFound(job_id)
        return job.to_json()

    @app.post("/jobs/{job_id}/variant")
    async def select_variant(job_id: str, request: Request):
        body = await request.json()
        index = body.get("index")
        job = broker.jobs.get(job_id)
        if job is None:
            raise JobNotFound(job_id)
        # recorded as a selection instruction so session logs replay faithfully
        instr = broker.make_instruction(
            job.instruction_type,
            object_id=job.target_object_id,
            selected_variant=index,
        )
        broker.submit_instruction(instr)
        return broker.jobs[job_id].to_json()

    @app.post("/snapshot")
    async def snapshot(request: Request):
        body = await request.json()
        job_id = broker.magic_camera_snapshot(body.get("camera", {}), body.get("prompt", ""))
        return {"job_id": job_id}

    @app.post("/offline/run")
    def offline_run():
        return {"processed": broker.run_offline_once()}

    @app.get("/assets/{asset_id}")
    def get_asset(asset_id: str):
        data = broker.assets.get(asset_id)
        return Response(content=data, media_type=broker.assets.media_type(asset_id))

    @app.get("/events")
    def events(limit: int | None = None):
        q = hub.subscribe()

        def stream():
            sent = 0
            try:
                while limit is None or sent < limit:
                    if hub.is_closed(q):
                        return
                    try:
                        message = q.get(timeout=0.5)
                    except queue.Empty:
                        yield ": keepalive\n\n"
                        continue
                    yield f"data: {json.dumps(message)}\n\n"
                    sent += 1
            finally:
                hub.unsubscribe(q)

        return StreamingResponse(stream(), media_type="text/event-stream")

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        # mounted last so the API routes above keep precedence
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def _now_ms() -> int:
    import time

    return int(time.time() * 1000)
