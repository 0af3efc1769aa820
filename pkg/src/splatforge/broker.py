"""Generative-job orchestration.

The broker is the latency-hiding core: non-generative instructions mutate the
scene synchronously; generative ones return immediately with a job id while a
bounded worker pool produces three preview variants online. Variant selection
queues the job for the strictly sequential offline pass, which swaps each
proxy for its full-fidelity asset while preserving id, transform, and
annotation (so repositioning a proxy during the wait is honored).

State machine (terminal states absorbing; any non-terminal job is superseded
by a conflicting submission on the same target):

    submitted -> proxy_running -> {proxy_ready, failed}
    proxy_ready -> {variant_selected, superseded}
    variant_selected -> offline_queued
    offline_queued -> {offline_running, superseded}
    offline_running -> {completed, failed}
"""

from __future__ import annotations

import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable

import numpy as np

from .assets import AssetStore
from .backends import (
    AssetRole,
    Backend,
    EmptyPrompt,
    GenerationRequest,
    GenerationResult,
    ModuleKind,
    VariantSet,
    dispatch,
    generate_variants,
)
from .backends.hashing import SplitMix64, fnv1a64
from .geometry import Aabb, Vec3, look_at
from .render import Camera, compose_snapshot, render_primitives, write_pgm16, write_ppm
from .scene import (
    DictResolver,
    EditInstruction,
    GENERATIVE_TYPES,
    InstructionType,
    MalformedInstruction,
    ObjectKind,
    ObjectKindTag,
    ResolvedResult,
    Scene,
    anchor_bounds_for_kind,
    apply_edit,
)


class BrokerErrorBase(Exception):
    pass


class IllegalTransition(BrokerErrorBase):
    def __init__(self, state: "JobState", target: "JobState"):
        super().__init__(f"illegal transition {state.value} -> {target.value}")
        self.state = state
        self.target = target


class WrongState(BrokerErrorBase):
    pass


class BadIndex(BrokerErrorBase):
    pass


class JobNotFound(BrokerErrorBase):
    pass


class JobState(str, Enum):
    SUBMITTED = "submitted"
    PROXY_RUNNING = "proxy_running"
    PROXY_READY = "proxy_ready"
    VARIANT_SELECTED = "variant_selected"
    OFFLINE_QUEUED = "offline_queued"
    OFFLINE_RUNNING = "offline_running"
    COMPLETED = "completed"
    FAILED = "failed"
    SUPERSEDED = "superseded"


TERMINAL_STATES = frozenset({JobState.COMPLETED, JobState.FAILED, JobState.SUPERSEDED})


class JobEvent(str, Enum):
    """Lifecycle events accepted by advance_job."""

    PROXY_DONE = "proxy_done"  # payload: VariantSet
    PROXY_FAILED = "proxy_failed"  # payload: error text
    OFFLINE_DONE = "offline_done"  # payload: GenerationResult
    OFFLINE_FAILED = "offline_failed"  # payload: error text

_TRANSITIONS = frozenset(
    {
        (JobState.SUBMITTED, JobState.PROXY_RUNNING),
        (JobState.PROXY_RUNNING, JobState.PROXY_READY),
        (JobState.PROXY_RUNNING, JobState.FAILED),
        (JobState.PROXY_READY, JobState.VARIANT_SELECTED),
        (JobState.VARIANT_SELECTED, JobState.OFFLINE_QUEUED),
        (JobState.OFFLINE_QUEUED, JobState.OFFLINE_RUNNING),
        (JobState.OFFLINE_RUNNING, JobState.COMPLETED),
        (JobState.OFFLINE_RUNNING, JobState.FAILED),
    }
)


def can_transition(state: JobState, target: JobState) -> bool:
    """Pure transition-table check (supersession allowed from any live state)."""
    if state in TERMINAL_STATES:
        return False
    if target == JobState.SUPERSEDED:
        return True
    return (state, target) in _TRANSITIONS


ONLINE_KIND_BY_TYPE = {
    InstructionType.EDIT_OBJECT: ModuleKind.INSTRUCT_IMAGE_EDIT,
    InstructionType.GENERATE_PROMPT: ModuleKind.TEXT_TO_3D_PREVIEW,
    InstructionType.GENERATE_SCULPT: ModuleKind.IMAGE_STYLIZE,
    InstructionType.MAGIC_CAMERA: ModuleKind.IMAGE_STYLIZE,
}

OFFLINE_KIND_BY_TYPE = {
    InstructionType.EDIT_OBJECT: ModuleKind.SPLAT_EDIT,
    InstructionType.GENERATE_PROMPT: ModuleKind.IMAGE_TO_3D,
    InstructionType.GENERATE_SCULPT: ModuleKind.IMAGE_TO_3D,
    InstructionType.MAGIC_CAMERA: None,  # the selected stylized frame is the result
}


@dataclass
class BrokerConfig:
    online_workers: int = 2
    online_timeout: float = 30.0
    offline_timeout: float = 1800.0
    auto_select: int | None = None
    base_seed: int = 0
    preview_size: int = 128  # render size for edit/sculpt backend inputs

    def validate(self) -> None:
        if self.online_workers < 1:
            raise ValueError("online_workers must be >= 1")
        if self.online_timeout <= 0 or self.offline_timeout <= 0:
            raise ValueError("timeouts must be positive")
        if self.auto_select is not None and self.auto_select not in (0, 1, 2):
            raise ValueError("auto_select must be 0..2")


@dataclass
class GenerationJob:
    id: str
    instruction_id: str
    target_object_id: str
    kind: ModuleKind
    offline_kind: ModuleKind | None
    instruction_type: InstructionType
    seq: int
    seed: int
    state: JobState = JobState.SUBMITTED
    variants: VariantSet | None = None
    selected_variant: int | None = None
    created_ms: int = 0
    updated_ms: int = 0
    error: str | None = None
    warning: str | None = None
    superseded_by: str | None = None

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "instruction_id": self.instruction_id,
            "target_object_id": self.target_object_id,
            "kind": self.kind.value,
            "offline_kind": self.offline_kind.value if self.offline_kind else None,
            "state": self.state.value,
            "seq": self.seq,
            "seed": self.seed,
            "variants": (
                None
                if self.variants is None
                else [
                    {"seed": v.seed, "assets": [[r.value, a] for r, a in v.assets]}
                    for v in self.variants.variants
                ]
            ),
            "selected_variant": self.selected_variant,
            "created_ms": self.created_ms,
            "updated_ms": self.updated_ms,
            "error": self.error,
            "warning": self.warning,
            "superseded_by": self.superseded_by,
        }


def _now_ms() -> int:
    return int(time.time() * 1000)


def job_id_for_instruction(instruction_id: str) -> str:
    return str(uuid.uuid5(uuid.NAMESPACE_URL, f"splatforge:job:{instruction_id}"))


def frame_bounds_camera(bounds_world: Aabb, size: int = 128) -> Camera:
    """Deterministic camera framing a world-space box from the front-above."""
    center = bounds_world.center()
    ext = bounds_world.corners() - center.to_array()
    radius = max(float(np.linalg.norm(ext, axis=1).max()), 0.25)
    position = Vec3(center.x, center.y + 0.45 * radius, center.z + 2.4 * radius)
    return Camera(
        position=position,
        rotation=look_at(position, center),
        fov_y=np.pi / 3,
        width=size,
        height=size,
        near=max(0.01, 0.05 * radius),
        far=max(10.0 * radius, 20.0),
    )


class Broker:
    """Single-writer orchestration over a scene, an asset store, and a backend."""

    def __init__(
        self,
        backend: Backend,
        assets: AssetStore,
        scene: Scene | None = None,
        config: BrokerConfig | None = None,
    ):
        self.backend = backend
        self.assets = assets
        self.config = config or BrokerConfig()
        self.config.validate()
        self.scene = scene if scene is not None else Scene()
        self.jobs: dict[str, GenerationJob] = {}
        self.resolver = DictResolver()
        self.log: list[EditInstruction] = []
        self.job_events: list[dict] = []
        self._event_seq = 0
        self._instruction_by_job: dict[str, EditInstruction] = {}
        self._lock = threading.RLock()
        self._cond = threading.Condition(self._lock)
        self._listeners: list[Callable[[str, dict], None]] = []
        self._pool = ThreadPoolExecutor(max_workers=self.config.online_workers)

    # -- events ------------------------------------------------------------

    def add_listener(self, fn: Callable[[str, dict], None]) -> None:
        """fn(kind, payload); kinds: scene_changed, job_state_changed, asset_added."""
        with self._lock:
            self._listeners.append(fn)

    def _emit(self, kind: str, payload: dict) -> None:
        for fn in list(self._listeners):
            try:
                fn(kind, payload)
            except Exception:
                pass  # listeners must never break the writer

    def _set_scene(self, scene: Scene, reason: str) -> None:
        self.scene = scene
        self._emit("scene_changed", {"reason": reason, "next_seq": scene.next_seq})

    def _transition(self, job: GenerationJob, target: JobState) -> None:
        if not can_transition(job.state, target):
            raise IllegalTransition(job.state, target)
        source = job.state
        job.state = target
        job.updated_ms = _now_ms()
        self._event_seq += 1
        event = {
            "job_id": job.id,
            "seq": self._event_seq,
            "from": source.value,
            "to": target.value,
            "timestamp_ms": job.updated_ms,
        }
        self.job_events.append(event)
        self._cond.notify_all()
        self._emit("job_state_changed", event)

    # -- submission ---------------------------------------------------------

    def make_instruction(self, type_: InstructionType, **fields) -> EditInstruction:
        """Allocate id/seq/timestamp for a live instruction."""
        with self._lock:
            return EditInstruction(
                id=str(uuid.uuid4()),
                seq=self.scene.next_seq,
                timestamp_ms=_now_ms(),
                type=type_,
                **fields,
            )

    def submit_instruction(self, instr: EditInstruction) -> tuple[str | None, bool]:
        """Apply an instruction; generative ones return a job id immediately.

        The return time is bounded by scene bookkeeping only: backend work,
        including input snapshot rendering, happens on the worker pool.
        """
        with self._lock:
            if instr.seq < self.scene.next_seq:
                # live submissions race for seq numbers; the writer owns the order
                instr = replace(instr, seq=self.scene.next_seq)
            if instr.is_selection:
                return self._submit_selection(instr)

            if instr.type not in GENERATIVE_TYPES:
                scene = apply_edit(self.scene, instr, self.resolver, self.assets)
                self.log.append(instr)
                self._set_scene(scene, instr.type.value)
                return None, True

            if not instr.prompt:
                raise EmptyPrompt(f"{instr.type.value} requires a non-empty prompt")
            if instr.type == InstructionType.EDIT_OBJECT:
                target = self.scene.find(instr.object_id)
                if target.kind.tag != ObjectKindTag.SPLAT:
                    raise MalformedInstruction(
                        "edit_object targets splat objects; got "
                        f"{target.kind.tag.value}"
                    )

            scene = apply_edit(self.scene, instr, self.resolver, self.assets)
            self.log.append(instr)

            target_id = instr.object_id if instr.object_id is not None else instr.id
            for other in self.jobs.values():
                if other.target_object_id == target_id and other.state not in TERMINAL_STATES:
                    other.superseded_by = job_id_for_instruction(instr.id)
                    self._transition(other, JobState.SUPERSEDED)

            job = GenerationJob(
                id=job_id_for_instruction(instr.id),
                instruction_id=instr.id,
                target_object_id=target_id,
                kind=ONLINE_KIND_BY_TYPE[instr.type],
                offline_kind=OFFLINE_KIND_BY_TYPE[instr.type],
                instruction_type=instr.type,
                seq=instr.seq,
                seed=self._seed_for(instr),
                created_ms=_now_ms(),
                updated_ms=_now_ms(),
            )
            self.jobs[job.id] = job
            self._instruction_by_job[job.id] = instr
            self._set_scene(scene, instr.type.value)
            self._pool.submit(self._run_online, job.id)
            return job.id, True

    def _submit_selection(self, instr: EditInstruction) -> tuple[str | None, bool]:
        """A log row with selected_variant and no prompt picks a variant for the
        pending job on that object. Re-picking while offline-queued is allowed;
        selecting on a running or terminal job is WrongState."""
        index = instr.selected_variant
        if index not in (0, 1, 2):
            raise BadIndex(f"variant index {index} out of range")
        job = self._live_job_for_target(instr.object_id)
        if job is not None and job.state not in (
            JobState.PROXY_READY,
            JobState.OFFLINE_QUEUED,
        ):
            raise WrongState(f"job {job.id} is {job.state.value}")
        scene = apply_edit(self.scene, instr, self.resolver, self.assets)
        self.log.append(instr)
        self._set_scene(scene, "selection")
        if job is None:
            return None, True
        if job.state == JobState.PROXY_READY:
            self._select_locked(job, index)
        else:
            job.selected_variant = index
            self._attach_preview(job, index)
        return job.id, True

    def _seed_for(self, instr: EditInstruction) -> int:
        if "seed" in instr.params:
            return int(instr.params["seed"])
        return SplitMix64(self.config.base_seed ^ fnv1a64(instr.id)).next_u64()

    def _live_job_for_target(self, object_id: str) -> GenerationJob | None:
        for job in self.jobs.values():
            if job.target_object_id == object_id and job.state not in TERMINAL_STATES:
                return job
        return None

    # -- transition driver ------------------------------------------------------

    def advance_job(
        self,
        job_id: str,
        event: "JobEvent",
        payload: VariantSet | GenerationResult | str | None = None,
    ) -> JobState:
        """Apply one lifecycle event atomically; IllegalTransition otherwise.

        proxy_done carries the VariantSet (attaches variants and shows variant
        0 on the proxy pending selection); offline_done carries the
        GenerationResult (swaps the proxy for the full asset); the failure
        events carry an error string.
        """
        with self._lock:
            job = self.jobs.get(job_id)
            if job is None:
                raise JobNotFound(job_id)
            if event == JobEvent.PROXY_DONE:
                if job.state != JobState.PROXY_RUNNING or not isinstance(payload, VariantSet):
                    raise IllegalTransition(job.state, JobState.PROXY_READY)
                job.variants = payload
                self._transition(job, JobState.PROXY_READY)
                self._attach_preview(job, variant_index=0)
                if self.config.auto_select is not None:
                    self._select_locked(job, self.config.auto_select)
            elif event == JobEvent.PROXY_FAILED:
                if job.state != JobState.PROXY_RUNNING:
                    raise IllegalTransition(job.state, JobState.FAILED)
                job.error = str(payload) if payload is not None else "online phase failed"
                self._transition(job, JobState.FAILED)
            elif event == JobEvent.OFFLINE_DONE:
                if job.state != JobState.OFFLINE_RUNNING or not isinstance(
                    payload, GenerationResult
                ):
                    raise IllegalTransition(job.state, JobState.COMPLETED)
                self.apply_result(job, payload)
                self._transition(job, JobState.COMPLETED)
            elif event == JobEvent.OFFLINE_FAILED:
                if job.state != JobState.OFFLINE_RUNNING:
                    raise IllegalTransition(job.state, JobState.FAILED)
                job.error = str(payload) if payload is not None else "offline phase failed"
                self._transition(job, JobState.FAILED)
            else:  # pragma: no cover - closed enum
                raise IllegalTransition(job.state, job.state)
            return job.state

    # -- online phase --------------------------------------------------------

    def _run_online(self, job_id: str) -> None:
        with self._lock:
            job = self.jobs[job_id]
            instr = self._instruction_by_job[job_id]
            try:
                self._transition(job, JobState.PROXY_RUNNING)
            except IllegalTransition:
                return  # superseded before pickup
            scene_snapshot = self.scene
        try:
            req = self._online_request(job, instr, scene_snapshot)
            variants = generate_variants(
                self.backend, req, self.assets, timeout=self.config.online_timeout
            )
            self.advance_job(job_id, JobEvent.PROXY_DONE, variants)
        except IllegalTransition:
            return  # superseded while rendering
        except Exception as e:
            try:
                self.advance_job(job_id, JobEvent.PROXY_FAILED, str(e))
            except IllegalTransition:
                pass

    def _online_request(
        self, job: GenerationJob, instr: EditInstruction, scene: Scene
    ) -> GenerationRequest:
        t = instr.type
        size = self.config.preview_size
        if t == InstructionType.GENERATE_PROMPT:
            return GenerationRequest(
                kind=ModuleKind.TEXT_TO_3D_PREVIEW, prompt=instr.prompt, seed=job.seed
            )
        if t == InstructionType.EDIT_OBJECT:
            obj = scene.find(instr.object_id)
            cam = frame_bounds_camera(obj.anchor_bounds.transformed(obj.transform), size)
            single = Scene(objects=(obj,))
            target = compose_snapshot(single, cam, self.assets)
            return GenerationRequest(
                kind=ModuleKind.INSTRUCT_IMAGE_EDIT,
                prompt=instr.prompt,
                seed=job.seed,
                input_image=write_ppm(target.color),
            )
        if t == InstructionType.GENERATE_SCULPT:
            obj = scene.find(instr.object_id)
            cam = frame_bounds_camera(obj.anchor_bounds.transformed(obj.transform), size)
            target = render_primitives(cam, list(obj.kind.primitives), obj.transform)
            return GenerationRequest(
                kind=ModuleKind.IMAGE_STYLIZE,
                prompt=instr.prompt,
                seed=job.seed,
                input_image=write_ppm(target.color),
                input_depth=write_pgm16(target.depth, cam.near, cam.far),
            )
        if t == InstructionType.MAGIC_CAMERA:
            cam = Camera.from_json_dict(instr.params["camera"])
            target = compose_snapshot(scene, cam, self.assets)
            return GenerationRequest(
                kind=ModuleKind.IMAGE_STYLIZE,
                prompt=instr.prompt,
                seed=job.seed,
                input_image=write_ppm(target.color),
                input_depth=write_pgm16(target.depth, cam.near, cam.far),
            )
        raise MalformedInstruction(f"no online module for {t}")

    def _attach_preview(self, job: GenerationJob, variant_index: int) -> None:
        """Show a variant on the proxy object (image preview; 3D proxy upgrade
        for generations that produced a low-fidelity mesh)."""
        variant = job.variants.variants[variant_index]
        preview = variant.asset_for(AssetRole.PREVIEW_IMAGE)
        mesh = variant.asset_for(AssetRole.LOW_FI_MESH)
        try:
            obj = self.scene.find(job.target_object_id)
        except Exception:
            return  # target deleted while the preview was rendering
        ann = obj.annotation
        if ann is not None and preview is not None:
            ann = replace(ann, preview_asset=preview)
        kind = obj.kind
        bounds = obj.anchor_bounds
        if mesh is not None and kind.tag in (ObjectKindTag.PROXY2D, ObjectKindTag.PROXY3D):
            kind = ObjectKind.proxy3d(mesh)
            bounds = anchor_bounds_for_kind(kind, self.assets)
        elif kind.tag == ObjectKindTag.PROXY2D and preview is not None:
            kind = ObjectKind.proxy2d(preview)
        self._set_scene(
            self.scene.replacing(replace(obj, annotation=ann, kind=kind, anchor_bounds=bounds)),
            "proxy_preview",
        )

    # -- selection -----------------------------------------------------------

    def select_variant(self, job_id: str, index: int) -> JobState:
        with self._lock:
            job = self.jobs.get(job_id)
            if job is None:
                raise JobNotFound(job_id)
            self._select_locked(job, index)
            return job.state

    def _select_locked(self, job: GenerationJob, index: int) -> None:
        if job.state != JobState.PROXY_READY:
            raise WrongState(f"job {job.id} is {job.state.value}, not proxy_ready")
        if index not in (0, 1, 2):
            raise BadIndex(f"variant index {index} out of range")
        job.selected_variant = index
        self._transition(job, JobState.VARIANT_SELECTED)
        self._transition(job, JobState.OFFLINE_QUEUED)
        self._attach_preview(job, variant_index=index)
        try:
            obj = self.scene.find(job.target_object_id)
        except Exception:
            return
        if obj.annotation is not None:
            ann = replace(obj.annotation, variant_index=index)
            self._set_scene(self.scene.replacing(replace(obj, annotation=ann)), "variant")

    # -- offline phase ---------------------------------------------------------

    def run_offline_once(self) -> int:
        """Process every offline-queued job strictly in instruction seq order."""
        with self._lock:
            queued = sorted(
                (j for j in self.jobs.values() if j.state == JobState.OFFLINE_QUEUED),
                key=lambda j: j.seq,
            )
        processed = 0
        for job in queued:
            with self._lock:
                if job.state != JobState.OFFLINE_QUEUED:
                    continue  # superseded meanwhile
                self._transition(job, JobState.OFFLINE_RUNNING)
                instr = self._instruction_by_job[job.id]
            try:
                result = self._run_offline_job(job, instr)
            except Exception as e:  # isolation: one bad job never stalls the queue
                self.advance_job(job.id, JobEvent.OFFLINE_FAILED, str(e))
                continue
            self.advance_job(job.id, JobEvent.OFFLINE_DONE, result)
            processed += 1
        return processed

    def _selected_variant_asset(self, job: GenerationJob, role: AssetRole) -> str | None:
        index = job.selected_variant if job.selected_variant is not None else 0
        return job.variants.variants[index].asset_for(role)

    def _run_offline_job(
        self, job: GenerationJob, instr: EditInstruction
    ) -> GenerationResult:
        index = job.selected_variant if job.selected_variant is not None else 0
        seed = job.seed + index  # the seed that produced the chosen variant
        if job.offline_kind is None:
            # magic camera: the chosen stylized frame already is the result
            return job.variants.variants[index]
        if job.offline_kind == ModuleKind.SPLAT_EDIT:
            with self._lock:
                obj = self.scene.find(job.target_object_id)
                cloud_bytes = self.assets.get(obj.kind.asset)
            req = GenerationRequest(
                kind=ModuleKind.SPLAT_EDIT,
                prompt=instr.prompt,
                seed=seed,
                input_cloud=cloud_bytes,
            )
        else:  # image -> 3D for generations and sculpt stylizations
            preview_id = self._selected_variant_asset(job, AssetRole.PREVIEW_IMAGE)
            req = GenerationRequest(
                kind=ModuleKind.IMAGE_TO_3D,
                prompt=instr.prompt or "",
                seed=seed,
                input_image=self.assets.get(preview_id),
            )
        return dispatch(self.backend, req, self.assets, timeout=self.config.offline_timeout)

    def apply_result(self, job: GenerationJob, result: GenerationResult) -> None:
        """Swap the proxy for the full asset, preserving id/transform/annotation."""
        preview = self._selected_variant_asset(job, AssetRole.PREVIEW_IMAGE)
        variant = job.selected_variant if job.selected_variant is not None else 0

        if job.instruction_type == InstructionType.MAGIC_CAMERA:
            final_kind = ObjectKind.proxy2d(result.asset_for(AssetRole.PREVIEW_IMAGE))
            final_bounds = None
        elif job.offline_kind == ModuleKind.SPLAT_EDIT:
            final_kind = ObjectKind.splat(result.asset_for(AssetRole.EDITED_CLOUD))
            final_bounds = anchor_bounds_for_kind(final_kind, self.assets)
        else:
            final_kind = ObjectKind.mesh(result.asset_for(AssetRole.FULL_MESH))
            final_bounds = anchor_bounds_for_kind(final_kind, self.assets)

        self.resolver.results[job.instruction_id] = ResolvedResult(
            final_kind=final_kind,
            final_bounds=final_bounds,
            preview_asset=preview,
            variant_index=variant,
        )

        try:
            obj = self.scene.find(job.target_object_id)
        except Exception:
            job.warning = "target deleted during offline run; result stored as orphan asset"
            return
        updated = replace(
            obj,
            kind=final_kind,
            anchor_bounds=final_bounds if final_bounds is not None else obj.anchor_bounds,
        )
        if obj.annotation is not None and preview is not None:
            updated = replace(
                updated,
                annotation=replace(obj.annotation, preview_asset=preview, variant_index=variant),
            )
        self._set_scene(self.scene.replacing(updated), "apply_result")

    # -- magic camera ------------------------------------------------------------

    def magic_camera_snapshot(self, camera: Camera | dict, prompt: str) -> str:
        if not prompt:
            raise EmptyPrompt("magic camera requires a non-empty prompt")
        cam_dict = camera.to_json_dict() if isinstance(camera, Camera) else dict(camera)
        instr = self.make_instruction(
            InstructionType.MAGIC_CAMERA, prompt=prompt, params={"camera": cam_dict}
        )
        job_id, _ = self.submit_instruction(instr)
        return job_id

    # -- synchronization helpers ---------------------------------------------------

    def wait_for_state(
        self, job_id: str, states: frozenset[JobState] | set[JobState], timeout: float = 30.0
    ) -> JobState:
        deadline = time.monotonic() + timeout
        with self._cond:
            while True:
                job = self.jobs[job_id]
                if job.state in states:
                    return job.state
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    raise TimeoutError(
                        f"job {job_id} stuck in {job.state.value} waiting for "
                        f"{sorted(s.value for s in states)}"
                    )
                self._cond.wait(remaining)

    def wait_settled(self, job_id: str, timeout: float = 30.0) -> JobState:
        """Wait until online work is resolved (queued for offline or terminal)."""
        return self.wait_for_state(
            job_id,
            {JobState.PROXY_READY, JobState.OFFLINE_QUEUED} | set(TERMINAL_STATES),
            timeout,
        )

    def shutdown(self) -> None:
        self._pool.shutdown(wait=False, cancel_futures=True)


def replay_session(
    log_instructions: list[EditInstruction],
    backend: Backend,
    assets: AssetStore,
    initial: Scene | None = None,
    config: BrokerConfig | None = None,
) -> Broker:
    """Deterministic headless replay: instructions run in seq order, each
    generative job settles before the next instruction, then one offline pass."""
    cfg = config or BrokerConfig(auto_select=0)
    broker = Broker(backend, assets, scene=initial, config=cfg)
    try:
        for instr in log_instructions:
            job_id, _ = broker.submit_instruction(instr)
            if job_id is not None:
                broker.wait_settled(job_id, timeout=cfg.online_timeout + 5.0)
        broker.run_offline_once()
    finally:
        broker.shutdown()
    return broker
