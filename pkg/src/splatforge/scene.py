"""Editable scene graph: objects, annotations, and the append-only edit log.

Every user action is an :class:`EditInstruction`; the scene is only ever
mutated by :func:`apply_edit`, and a whole session replays as a pure fold of
the instruction log. Scenes serialize to canonical JSON (sorted keys,
9-significant-digit floats) so scene equality is byte equality.

Generative instructions (edit / generate / sculpt / magic camera) place or
annotate proxy objects; a :class:`ResultResolver` supplies finished backend
outputs, at which point the proxy's kind swaps to the full asset while id,
transform, and annotation are preserved.
"""

from __future__ import annotations

import json
import math
import uuid
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping, Protocol

import numpy as np

from .assets import AssetStore
from .geometry import Aabb, Quat, TransformTRS, Vec3
from .meshio import parse_obj
from .ply import parse_ply


class SceneError(Exception):
    pass


class ObjectNotFound(SceneError):
    def __init__(self, object_id: str):
        super().__init__(f"no object with id {object_id!r}")
        self.object_id = object_id


class MalformedInstruction(SceneError):
    pass


class StaleVariant(SceneError):
    """Variant selection arrived for an object with no pending variants."""


class ParseError(SceneError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class ReplayError(SceneError):
    def __init__(self, seq: int, cause: Exception, partial_scene: "Scene"):
        super().__init__(f"replay halted at seq {seq}: {cause}")
        self.seq = seq
        self.cause = cause
        self.partial_scene = partial_scene


class PrimitiveShape(str, Enum):
    SPHERE = "sphere"
    CUBE = "cube"
    CYLINDER = "cylinder"


@dataclass(frozen=True)
class Primitive:
    """Basic sculpting shape; local extent is [-1, 1]^3 before its transform."""

    shape: PrimitiveShape
    transform: TransformTRS


class ObjectKindTag(str, Enum):
    SPLAT = "splat"
    MESH = "mesh"
    PRIMITIVE_ARRANGEMENT = "primitive_arrangement"
    PROXY2D = "proxy2d"
    PROXY3D = "proxy3d"


PROXY_TAGS = (ObjectKindTag.PROXY2D, ObjectKindTag.PROXY3D)


@dataclass(frozen=True)
class ObjectKind:
    """Tagged union: asset-backed kinds carry an asset id, arrangements carry
    their primitives inline. Proxy2D may have no asset yet (label-only)."""

    tag: ObjectKindTag
    asset: str | None = None
    primitives: tuple[Primitive, ...] = ()

    @staticmethod
    def splat(asset: str) -> "ObjectKind":
        return ObjectKind(ObjectKindTag.SPLAT, asset=asset)

    @staticmethod
    def mesh(asset: str) -> "ObjectKind":
        return ObjectKind(ObjectKindTag.MESH, asset=asset)

    @staticmethod
    def arrangement(primitives: Iterable[Primitive]) -> "ObjectKind":
        return ObjectKind(ObjectKindTag.PRIMITIVE_ARRANGEMENT, primitives=tuple(primitives))

    @staticmethod
    def proxy2d(asset: str | None = None) -> "ObjectKind":
        return ObjectKind(ObjectKindTag.PROXY2D, asset=asset)

    @staticmethod
    def proxy3d(asset: str) -> "ObjectKind":
        return ObjectKind(ObjectKindTag.PROXY3D, asset=asset)

    @property
    def is_proxy(self) -> bool:
        return self.tag in PROXY_TAGS


class InstructionType(str, Enum):
    ADD_ASSET = "add_asset"
    MOVE = "move"
    DUPLICATE = "duplicate"
    DELETE = "delete"
    EDIT_OBJECT = "edit_object"
    GENERATE_PROMPT = "generate_prompt"
    GENERATE_SCULPT = "generate_sculpt"
    MAGIC_CAMERA = "magic_camera"


GENERATIVE_TYPES = frozenset(
    {
        InstructionType.EDIT_OBJECT,
        InstructionType.GENERATE_PROMPT,
        InstructionType.GENERATE_SCULPT,
        InstructionType.MAGIC_CAMERA,
    }
)


@dataclass(frozen=True)
class SpatialAnnotation:
    """Edit intent anchored to an object: prompt, preview, chosen variant."""

    prompt: str
    instruction_type: InstructionType
    preview_asset: str | None = None
    variant_index: int | None = None

    def __post_init__(self):
        if self.variant_index is not None and self.variant_index not in (0, 1, 2):
            raise ValueError(f"variant_index must be 0..2, got {self.variant_index}")


@dataclass(frozen=True)
class SceneObject:
    id: str
    kind: ObjectKind
    transform: TransformTRS
    anchor_bounds: Aabb
    annotation: SpatialAnnotation | None = None


@dataclass(frozen=True)
class EditInstruction:
    id: str
    seq: int
    timestamp_ms: int
    type: InstructionType
    object_id: str | None = None
    prompt: str | None = None
    transform: TransformTRS | None = None
    object_type: ObjectKindTag | None = None
    preview_asset: str | None = None
    selected_variant: int | None = None
    params: Mapping = field(default_factory=dict)

    @property
    def is_selection(self) -> bool:
        """A generative-type row with a variant choice and no prompt selects a
        variant for the pending job on object_id instead of starting a new one."""
        return (
            self.type in GENERATIVE_TYPES
            and self.prompt is None
            and self.selected_variant is not None
        )


@dataclass(frozen=True)
class Scene:
    objects: tuple[SceneObject, ...] = ()
    next_seq: int = 0
    initial_scene_ref: str | None = None

    def find(self, object_id: str) -> SceneObject:
        for obj in self.objects:
            if obj.id == object_id:
                return obj
        raise ObjectNotFound(object_id)

    def has(self, object_id: str) -> bool:
        return any(o.id == object_id for o in self.objects)

    def with_object(self, obj: SceneObject) -> "Scene":
        return replace(self, objects=self.objects + (obj,))

    def replacing(self, obj: SceneObject) -> "Scene":
        found = False
        out = []
        for o in self.objects:
            if o.id == obj.id:
                out.append(obj)
                found = True
            else:
                out.append(o)
        if not found:
            raise ObjectNotFound(obj.id)
        return replace(self, objects=tuple(out))

    def without(self, object_id: str) -> "Scene":
        if not self.has(object_id):
            raise ObjectNotFound(object_id)
        return replace(self, objects=tuple(o for o in self.objects if o.id != object_id))


@dataclass(frozen=True)
class EditLog:
    instructions: tuple[EditInstruction, ...]
    initial_scene_ref: str | None = None


@dataclass(frozen=True)
class ResolvedResult:
    """Finished backend output for one generative instruction."""

    final_kind: ObjectKind | None = None
    final_bounds: Aabb | None = None
    preview_asset: str | None = None
    variant_index: int | None = None


class ResultResolver(Protocol):
    def resolve(self, instruction_id: str) -> ResolvedResult | None: ...


class EmptyResolver:
    def resolve(self, instruction_id: str) -> ResolvedResult | None:
        return None


class DictResolver:
    def __init__(self, results: Mapping[str, ResolvedResult] | None = None):
        self.results: dict[str, ResolvedResult] = dict(results or {})

    def resolve(self, instruction_id: str) -> ResolvedResult | None:
        return self.results.get(instruction_id)


EMPTY_RESOLVER = EmptyResolver()

# Fallback collision volume when the referenced asset is unavailable: a 1 m
# panel/slot standing on the ground plane.
DEFAULT_ANCHOR_BOUNDS = Aabb(Vec3(-0.5, 0.0, -0.5), Vec3(0.5, 1.0, 0.5))


# --------------------------------------------------------------------------
# canonical JSON


def _canon_value(v) -> str:
    if v is None:
        return "null"
    if v is True:
        return "true"
    if v is False:
        return "false"
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ValueError("non-finite float in canonical JSON")
        return format(v, ".9g")
    if isinstance(v, (list, tuple)):
        return "[" + ",".join(_canon_value(x) for x in v) + "]"
    if isinstance(v, dict):
        items = sorted(v.items(), key=lambda kv: kv[0])
        return "{" + ",".join(f"{json.dumps(k)}:{_canon_value(x)}" for k, x in items) + "}"
    raise TypeError(f"cannot canonicalize {type(v).__name__}")


def canonical_json(value) -> bytes:
    """Deterministic JSON: sorted keys, 9-significant-digit floats, UTF-8."""
    return _canon_value(value).encode("utf-8")


# --------------------------------------------------------------------------
# JSON mapping of the domain types


def transform_to_json(t: TransformTRS) -> dict:
    return {
        "t": [t.translation.x, t.translation.y, t.translation.z],
        "r": [t.rotation.w, t.rotation.x, t.rotation.y, t.rotation.z],
        "s": t.scale,
    }


def transform_from_json(d) -> TransformTRS:
    if not isinstance(d, dict) or "t" not in d or "r" not in d or "s" not in d:
        raise MalformedInstruction(f"transform must have t/r/s, got {d!r}")
    t = TransformTRS(
        translation=Vec3(*(float(c) for c in d["t"])),
        rotation=Quat(*(float(c) for c in d["r"])).normalized(),
        scale=float(d["s"]),
    )
    t.validate()
    return t


def _aabb_to_json(b: Aabb) -> dict:
    return {"min": [b.min.x, b.min.y, b.min.z], "max": [b.max.x, b.max.y, b.max.z]}


def _aabb_from_json(d) -> Aabb:
    b = Aabb(Vec3(*(float(c) for c in d["min"])), Vec3(*(float(c) for c in d["max"])))
    b.validate()
    return b


def _primitive_to_json(p: Primitive) -> dict:
    return {"shape": p.shape.value, "transform": transform_to_json(p.transform)}


def _primitive_from_json(d) -> Primitive:
    return Primitive(PrimitiveShape(d["shape"]), transform_from_json(d["transform"]))


def kind_to_json(kind: ObjectKind) -> dict:
    out: dict = {"type": kind.tag.value}
    if kind.tag == ObjectKindTag.PRIMITIVE_ARRANGEMENT:
        out["primitives"] = [_primitive_to_json(p) for p in kind.primitives]
    else:
        out["asset"] = kind.asset
    return out


def kind_from_json(d) -> ObjectKind:
    tag = ObjectKindTag(d["type"])
    if tag == ObjectKindTag.PRIMITIVE_ARRANGEMENT:
        prims = tuple(_primitive_from_json(p) for p in d.get("primitives", []))
        return ObjectKind(tag, primitives=prims)
    return ObjectKind(tag, asset=d.get("asset"))


def _annotation_to_json(a: SpatialAnnotation) -> dict:
    return {
        "prompt": a.prompt,
        "instruction_type": a.instruction_type.value,
        "preview_asset": a.preview_asset,
        "variant_index": a.variant_index,
    }


def _annotation_from_json(d) -> SpatialAnnotation:
    return SpatialAnnotation(
        prompt=d["prompt"],
        instruction_type=InstructionType(d["instruction_type"]),
        preview_asset=d.get("preview_asset"),
        variant_index=d.get("variant_index"),
    )


def scene_to_dict(scene: Scene) -> dict:
    return {
        "initial_scene_ref": scene.initial_scene_ref,
        "next_seq": scene.next_seq,
        "objects": [
            {
                "id": o.id,
                "kind": kind_to_json(o.kind),
                "transform": transform_to_json(o.transform),
                "anchor_bounds": _aabb_to_json(o.anchor_bounds),
                "annotation": None if o.annotation is None else _annotation_to_json(o.annotation),
            }
            for o in scene.objects
        ],
    }


def serialize_scene(scene: Scene) -> bytes:
    return canonical_json(scene_to_dict(scene))


def deserialize_scene(data: bytes) -> Scene:
    try:
        raw = json.loads(data.decode("utf-8"))
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, e.colno) from e
    try:
        objects = []
        for od in raw.get("objects", []):
            objects.append(
                SceneObject(
                    id=od["id"],
                    kind=kind_from_json(od["kind"]),
                    transform=transform_from_json(od["transform"]),
                    anchor_bounds=_aabb_from_json(od["anchor_bounds"]),
                    annotation=(
                        None
                        if od.get("annotation") is None
                        else _annotation_from_json(od["annotation"])
                    ),
                )
            )
        return Scene(
            objects=tuple(objects),
            next_seq=int(raw.get("next_seq", 0)),
            initial_scene_ref=raw.get("initial_scene_ref"),
        )
    except (KeyError, ValueError, TypeError, MalformedInstruction) as e:
        raise ParseError(f"bad scene structure: {e}") from e


def instruction_to_json(instr: EditInstruction) -> dict:
    out: dict = {
        "id": instr.id,
        "seq": instr.seq,
        "timestamp_ms": instr.timestamp_ms,
        "type": instr.type.value,
    }
    if instr.object_id is not None:
        out["object_id"] = instr.object_id
    if instr.prompt is not None:
        out["prompt"] = instr.prompt
    if instr.transform is not None:
        out["transform"] = transform_to_json(instr.transform)
    if instr.object_type is not None:
        out["object_type"] = instr.object_type.value
    if instr.preview_asset is not None:
        out["preview_asset"] = instr.preview_asset
    if instr.selected_variant is not None:
        out["selected_variant"] = instr.selected_variant
    if instr.params:
        out["params"] = dict(instr.params)
    return out


def instruction_from_json(d: Mapping) -> EditInstruction:
    try:
        return EditInstruction(
            id=str(d["id"]),
            seq=int(d["seq"]),
            timestamp_ms=int(d["timestamp_ms"]),
            type=InstructionType(d["type"]),
            object_id=d.get("object_id"),
            prompt=d.get("prompt"),
            transform=(
                transform_from_json(d["transform"]) if d.get("transform") is not None else None
            ),
            object_type=(
                ObjectKindTag(d["object_type"]) if d.get("object_type") is not None else None
            ),
            preview_asset=d.get("preview_asset"),
            selected_variant=d.get("selected_variant"),
            params=dict(d.get("params", {})),
        )
    except (KeyError, ValueError, TypeError) as e:
        raise MalformedInstruction(f"bad instruction: {e}") from e


def read_edit_log(data: bytes, initial_scene_ref: str | None = None) -> EditLog:
    """Parse a JSONL edit log; seq values must be strictly increasing."""
    instructions = []
    last_seq = None
    for lineno, line in enumerate(data.decode("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            d = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(f"log line {lineno}: {e.msg}", lineno, e.colno) from e
        instr = instruction_from_json(d)
        if last_seq is not None and instr.seq <= last_seq:
            raise MalformedInstruction(
                f"log line {lineno}: seq {instr.seq} not greater than previous {last_seq}"
            )
        last_seq = instr.seq
        instructions.append(instr)
    return EditLog(tuple(instructions), initial_scene_ref)


def write_edit_log(log: EditLog) -> bytes:
    lines = [canonical_json(instruction_to_json(i)).decode("utf-8") for i in log.instructions]
    return ("\n".join(lines) + ("\n" if lines else "")).encode("utf-8")


# --------------------------------------------------------------------------
# anchor bounds and ground snapping


def primitive_local_bounds(primitives: Iterable[Primitive]) -> Aabb:
    boxes = [
        Aabb(Vec3(-1.0, -1.0, -1.0), Vec3(1.0, 1.0, 1.0)).transformed(p.transform)
        for p in primitives
    ]
    if not boxes:
        return DEFAULT_ANCHOR_BOUNDS
    pts = np.concatenate([b.corners() for b in boxes])
    return Aabb.of_points(pts)


def anchor_bounds_for_kind(kind: ObjectKind, assets: AssetStore | None) -> Aabb:
    """Collision volume in object-local space; falls back to a default box."""
    if kind.tag == ObjectKindTag.PRIMITIVE_ARRANGEMENT:
        return primitive_local_bounds(kind.primitives)
    if assets is None or kind.asset is None or kind.asset not in assets:
        return DEFAULT_ANCHOR_BOUNDS
    data = assets.get(kind.asset)
    if kind.tag == ObjectKindTag.SPLAT:
        cloud = parse_ply(data)
        if len(cloud) == 0:
            return DEFAULT_ANCHOR_BOUNDS
        return cloud.bounds()
    if kind.tag in (ObjectKindTag.MESH, ObjectKindTag.PROXY3D):
        mesh = parse_obj(data)
        if len(mesh.vertices) == 0:
            return DEFAULT_ANCHOR_BOUNDS
        lo, hi = mesh.bounds()
        return Aabb(Vec3.from_array(lo), Vec3.from_array(hi))
    return DEFAULT_ANCHOR_BOUNDS


def _snap_to_ground(bounds: Aabb) -> TransformTRS:
    """Placement that rests the bounds' minimum y on the ground plane."""
    return TransformTRS(Vec3(0.0, -bounds.min.y, 0.0), Quat.identity(), 1.0)


def duplicate_object_id(instruction_id: str) -> str:
    return str(uuid.uuid5(uuid.NAMESPACE_URL, f"splatforge:duplicate:{instruction_id}"))


# --------------------------------------------------------------------------
# apply / replay


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise MalformedInstruction(message)


def _apply_selection(scene: Scene, instr: EditInstruction) -> Scene:
    _require(instr.object_id is not None, f"{instr.type.value} selection requires object_id")
    if instr.selected_variant not in (0, 1, 2):
        raise MalformedInstruction(f"selected_variant must be 0..2, got {instr.selected_variant}")
    obj = scene.find(instr.object_id)
    if obj.annotation is None:
        raise StaleVariant(f"object {obj.id!r} has no pending variants")
    ann = replace(
        obj.annotation,
        variant_index=instr.selected_variant,
        preview_asset=instr.preview_asset or obj.annotation.preview_asset,
    )
    return scene.replacing(replace(obj, annotation=ann))


def _annotation_for(
    instr: EditInstruction, resolved: ResolvedResult | None
) -> SpatialAnnotation:
    preview = instr.preview_asset
    variant = instr.selected_variant
    if resolved is not None:
        preview = resolved.preview_asset or preview
        variant = resolved.variant_index if resolved.variant_index is not None else variant
    return SpatialAnnotation(
        prompt=instr.prompt or "",
        instruction_type=instr.type,
        preview_asset=preview,
        variant_index=variant,
    )


def apply_edit(
    scene: Scene,
    instr: EditInstruction,
    results: ResultResolver = EMPTY_RESOLVER,
    assets: AssetStore | None = None,
) -> Scene:
    """Apply one instruction, returning a new scene (inputs untouched)."""
    if instr.transform is not None:
        instr.transform.validate()

    if instr.is_selection:
        out = _apply_selection(scene, instr)
        return replace(out, next_seq=max(out.next_seq, instr.seq + 1))

    t = instr.type
    if t == InstructionType.ADD_ASSET:
        _require(instr.object_type is not None, "add_asset requires object_type")
        if instr.object_type == ObjectKindTag.PRIMITIVE_ARRANGEMENT:
            prims = instr.params.get("primitives")
            _require(prims is not None, "add_asset arrangement requires params.primitives")
            kind = ObjectKind.arrangement(_primitive_from_json(p) for p in prims)
        else:
            asset = instr.params.get("asset")
            _require(asset is not None, "add_asset requires params.asset")
            kind = ObjectKind(instr.object_type, asset=asset)
        bounds = anchor_bounds_for_kind(kind, assets)
        transform = instr.transform if instr.transform is not None else _snap_to_ground(bounds)
        out = scene.with_object(
            SceneObject(id=instr.id, kind=kind, transform=transform, anchor_bounds=bounds)
        )

    elif t == InstructionType.MOVE:
        _require(instr.object_id is not None, "move requires object_id")
        _require(instr.transform is not None, "move requires transform")
        obj = scene.find(instr.object_id)
        out = scene.replacing(replace(obj, transform=instr.transform))

    elif t == InstructionType.DUPLICATE:
        _require(instr.object_id is not None, "duplicate requires object_id")
        obj = scene.find(instr.object_id)
        out = scene.with_object(replace(obj, id=duplicate_object_id(instr.id)))

    elif t == InstructionType.DELETE:
        _require(instr.object_id is not None, "delete requires object_id")
        out = scene.without(instr.object_id)

    elif t == InstructionType.EDIT_OBJECT:
        _require(instr.object_id is not None, "edit_object requires object_id")
        _require(instr.prompt is not None, "edit_object requires prompt")
        obj = scene.find(instr.object_id)
        resolved = results.resolve(instr.id)
        ann = _annotation_for(instr, resolved)
        if resolved is not None and resolved.final_kind is not None:
            bounds = resolved.final_bounds or anchor_bounds_for_kind(resolved.final_kind, assets)
            obj = replace(obj, kind=resolved.final_kind, anchor_bounds=bounds, annotation=ann)
        else:
            obj = replace(obj, annotation=ann)
        out = scene.replacing(obj)

    elif t == InstructionType.GENERATE_PROMPT:
        _require(instr.prompt is not None, "generate_prompt requires prompt")
        _require(instr.transform is not None, "generate_prompt requires transform (placement)")
        resolved = results.resolve(instr.id)
        ann = _annotation_for(instr, resolved)
        if resolved is not None and resolved.final_kind is not None:
            kind = resolved.final_kind
            bounds = resolved.final_bounds or anchor_bounds_for_kind(kind, assets)
        else:
            kind = ObjectKind.proxy2d(ann.preview_asset)
            bounds = DEFAULT_ANCHOR_BOUNDS
        out = scene.with_object(
            SceneObject(
                id=instr.id,
                kind=kind,
                transform=instr.transform,
                anchor_bounds=bounds,
                annotation=ann,
            )
        )

    elif t == InstructionType.GENERATE_SCULPT:
        _require(instr.object_id is not None, "generate_sculpt requires object_id")
        _require(instr.prompt is not None, "generate_sculpt requires prompt")
        obj = scene.find(instr.object_id)
        resolved = results.resolve(instr.id)
        ann = _annotation_for(instr, resolved)
        if resolved is not None and resolved.final_kind is not None:
            bounds = resolved.final_bounds or anchor_bounds_for_kind(resolved.final_kind, assets)
            obj = replace(obj, kind=resolved.final_kind, anchor_bounds=bounds, annotation=ann)
        else:
            obj = replace(obj, annotation=ann)
        out = scene.replacing(obj)

    elif t == InstructionType.MAGIC_CAMERA:
        _require(instr.prompt is not None, "magic_camera requires prompt")
        _require("camera" in instr.params, "magic_camera requires params.camera")
        cam = instr.params["camera"]
        resolved = results.resolve(instr.id)
        ann = _annotation_for(instr, resolved)
        pos = [float(c) for c in cam.get("position", [0.0, 0.0, 0.0])]
        rot = [float(c) for c in cam.get("rotation", [1.0, 0.0, 0.0, 0.0])]
        transform = TransformTRS(Vec3(*pos), Quat(*rot).normalized(), 1.0)
        panel = Aabb(Vec3(-0.25, -0.25, -0.05), Vec3(0.25, 0.25, 0.05))
        out = scene.with_object(
            SceneObject(
                id=instr.id,
                kind=ObjectKind.proxy2d(ann.preview_asset),
                transform=transform,
                anchor_bounds=panel,
                annotation=ann,
            )
        )

    else:  # pragma: no cover - closed enum
        raise MalformedInstruction(f"unknown instruction type {t!r}")

    return replace(out, next_seq=max(out.next_seq, instr.seq + 1))


def replay_log(
    initial: Scene,
    log: EditLog,
    results: ResultResolver = EMPTY_RESOLVER,
    assets: AssetStore | None = None,
) -> Scene:
    """Fold apply_edit over the log in seq order.

    Deterministic: identical inputs produce byte-identical serializations. On
    the first failing instruction a ReplayError carrying the partial scene is
    raised.
    """
    scene = initial
    last_seq = None
    for instr in log.instructions:
        if last_seq is not None and instr.seq <= last_seq:
            raise ReplayError(
                instr.seq,
                MalformedInstruction(f"seq {instr.seq} not greater than {last_seq}"),
                scene,
            )
        try:
            scene = apply_edit(scene, instr, results, assets)
        except SceneError as e:
            raise ReplayError(instr.seq, e, scene) from e
        last_seq = instr.seq
    return scene
