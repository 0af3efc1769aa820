"""Generative backend contract: request/result types, validation, dispatch.

A backend is a stateless callable surface: it supports some module kinds and
turns a request into raw asset payloads. :func:`dispatch` validates the
request, enforces the per-kind timeout, registers payload bytes in the asset
store and checks that the produced roles match the kind.
:func:`generate_variants` runs three dispatches with consecutive seeds.
"""

from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Protocol, runtime_checkable

from ..assets import AssetStore

VARIANT_COUNT = 3  # contract: a variant set is exactly three consecutive seeds


class ModuleKind(str, Enum):
    INSTRUCT_IMAGE_EDIT = "instruct_image_edit"
    TEXT_TO_3D_PREVIEW = "text_to_3d_preview"
    IMAGE_STYLIZE = "image_stylize"
    IMAGE_TO_3D = "image_to_3d"
    SPLAT_EDIT = "splat_edit"
    PROMPT_ENRICH = "prompt_enrich"

    @property
    def kebab(self) -> str:
        return self.value.replace("_", "-")


class AssetRole(str, Enum):
    PREVIEW_IMAGE = "preview_image"
    LOW_FI_MESH = "low_fi_mesh"
    FULL_MESH = "full_mesh"
    EDITED_CLOUD = "edited_cloud"
    ENRICHED_PROMPT = "enriched_prompt"


ROLES_BY_KIND: dict[ModuleKind, frozenset[AssetRole]] = {
    ModuleKind.INSTRUCT_IMAGE_EDIT: frozenset({AssetRole.PREVIEW_IMAGE}),
    ModuleKind.TEXT_TO_3D_PREVIEW: frozenset({AssetRole.LOW_FI_MESH, AssetRole.PREVIEW_IMAGE}),
    ModuleKind.IMAGE_STYLIZE: frozenset({AssetRole.PREVIEW_IMAGE}),
    ModuleKind.IMAGE_TO_3D: frozenset({AssetRole.FULL_MESH}),
    ModuleKind.SPLAT_EDIT: frozenset({AssetRole.EDITED_CLOUD}),
    ModuleKind.PROMPT_ENRICH: frozenset({AssetRole.ENRICHED_PROMPT}),
}


class BackendFailure(Exception):
    """Base class for backend-side errors."""


class UnsupportedKind(BackendFailure):
    pass


class MalformedRequest(BackendFailure):
    pass


class EmptyPrompt(MalformedRequest):
    pass


class DimensionMismatch(MalformedRequest):
    pass


class BackendUnavailable(BackendFailure):
    pass


class BackendError(BackendFailure):
    def __init__(self, status: int, body: str):
        super().__init__(f"backend returned {status}: {body[:200]}")
        self.status = status
        self.body = body


class Timeout(BackendFailure):
    def __init__(self, kind: "ModuleKind", elapsed: float):
        super().__init__(f"{kind.value} timed out after {elapsed:.2f}s")
        self.kind = kind
        self.elapsed = elapsed


class BadResponse(BackendFailure):
    pass


class VariantError(BackendFailure):
    """Dispatch failure tagged with the failing variant index."""

    def __init__(self, variant_index: int, cause: Exception):
        super().__init__(f"variant {variant_index} failed: {cause}")
        self.variant_index = variant_index
        self.cause = cause


@dataclass(frozen=True)
class GenerationRequest:
    kind: ModuleKind
    prompt: str = ""
    seed: int = 0
    input_image: bytes | None = None  # PPM
    input_depth: bytes | None = None  # 16-bit PGM
    input_cloud: bytes | None = None  # PLY
    params: Mapping = field(default_factory=dict)


@dataclass(frozen=True)
class AssetPayload:
    """Raw backend output before it is registered in the asset store."""

    role: AssetRole
    data: bytes
    media_type: str


@dataclass(frozen=True)
class GenerationResult:
    kind: ModuleKind
    assets: tuple[tuple[AssetRole, str], ...]  # (role, asset id)
    seed: int

    def asset_for(self, role: AssetRole) -> str | None:
        for r, asset_id in self.assets:
            if r == role:
                return asset_id
        return None


@dataclass(frozen=True)
class VariantSet:
    variants: tuple[GenerationResult, ...]
    base_seed: int

    def __post_init__(self):
        if len(self.variants) != VARIANT_COUNT:
            raise ValueError(f"a variant set holds exactly {VARIANT_COUNT} results")
        for i, v in enumerate(self.variants):
            if v.seed != self.base_seed + i:
                raise ValueError(f"variant {i} seed {v.seed} != base {self.base_seed}+{i}")


@runtime_checkable
class Backend(Protocol):
    def supports(self, kind: ModuleKind) -> bool: ...

    def run(self, req: GenerationRequest) -> list[AssetPayload]: ...


_PROMPT_KINDS = frozenset(
    {
        ModuleKind.INSTRUCT_IMAGE_EDIT,
        ModuleKind.TEXT_TO_3D_PREVIEW,
        ModuleKind.IMAGE_STYLIZE,
        ModuleKind.SPLAT_EDIT,
        ModuleKind.PROMPT_ENRICH,
    }
)


def validate_request(req: GenerationRequest) -> None:
    kind = req.kind
    if kind in _PROMPT_KINDS and not req.prompt:
        raise EmptyPrompt(f"{kind.value} requires a non-empty prompt")
    needs_image = kind in (
        ModuleKind.INSTRUCT_IMAGE_EDIT,
        ModuleKind.IMAGE_STYLIZE,
        ModuleKind.IMAGE_TO_3D,
        ModuleKind.PROMPT_ENRICH,
    )
    if needs_image and req.input_image is None:
        raise MalformedRequest(f"{kind.value} requires input_image")
    if kind == ModuleKind.IMAGE_STYLIZE and req.input_depth is None:
        raise MalformedRequest("image_stylize requires input_depth")
    if kind == ModuleKind.SPLAT_EDIT and req.input_cloud is None:
        raise MalformedRequest("splat_edit requires input_cloud")


def _run_with_timeout(backend: Backend, req: GenerationRequest, timeout: float | None):
    if timeout is None:
        return backend.run(req)
    result: list = []
    error: list = []

    def work():
        try:
            result.append(backend.run(req))
        except Exception as e:  # surfaced on the caller thread
            error.append(e)

    start = time.monotonic()
    worker = threading.Thread(target=work, daemon=True)
    worker.start()
    worker.join(timeout)
    if worker.is_alive():
        raise Timeout(req.kind, time.monotonic() - start)
    if error:
        raise error[0]
    return result[0]


def dispatch(
    backend: Backend,
    req: GenerationRequest,
    store: AssetStore,
    timeout: float | None = None,
) -> GenerationResult:
    """Run one request and register its outputs; never blocks past `timeout`."""
    validate_request(req)
    if not backend.supports(req.kind):
        raise UnsupportedKind(f"backend does not support {req.kind.value}")
    payloads = _run_with_timeout(backend, req, timeout)
    if not payloads:
        raise BadResponse(f"{req.kind.value} produced no assets")
    allowed = ROLES_BY_KIND[req.kind]
    assets = []
    for p in payloads:
        if p.role not in allowed:
            raise BadResponse(f"role {p.role.value} not valid for {req.kind.value}")
        assets.append((p.role, store.put(p.data, p.media_type)))
    return GenerationResult(kind=req.kind, assets=tuple(assets), seed=req.seed)


def generate_variants(
    backend: Backend,
    req: GenerationRequest,
    store: AssetStore,
    timeout: float | None = None,
) -> VariantSet:
    """Three dispatches with seeds base, base+1, base+2, run concurrently."""
    from dataclasses import replace

    reqs = [replace(req, seed=req.seed + i) for i in range(VARIANT_COUNT)]
    with ThreadPoolExecutor(max_workers=VARIANT_COUNT) as pool:
        futures = [pool.submit(dispatch, backend, r, store, timeout) for r in reqs]
        results = []
        first_error: VariantError | None = None
        for i, fut in enumerate(futures):
            try:
                results.append(fut.result())
            except Exception as e:
                if first_error is None:
                    first_error = VariantError(i, e)
    if first_error is not None:
        raise first_error
    return VariantSet(variants=tuple(results), base_seed=req.seed)
