"""HTTP adapter for real model servers.

Wire protocol: POST {base_url}/{kind-kebab-case} with JSON
{"prompt", "seed", "params", "inputs": {"image"|"depth"|"cloud": base64}};
the server answers {"assets": [{"role", "mime", "data-base64"}]}. Meshes
travel as OBJ text, images as PPM/PGM (PNG accepted inbound).
"""

from __future__ import annotations

import base64
from typing import Mapping

import httpx

from ..assets import AssetStore
from .base import (
    AssetPayload,
    AssetRole,
    Backend,
    BackendError,
    BackendUnavailable,
    BadResponse,
    GenerationRequest,
    GenerationResult,
    ModuleKind,
    Timeout,
    dispatch,
)

DEFAULT_ONLINE_TIMEOUT_S = 30.0
DEFAULT_OFFLINE_TIMEOUT_S = 1800.0

_OFFLINE_KINDS = frozenset({ModuleKind.IMAGE_TO_3D, ModuleKind.SPLAT_EDIT})


def default_timeout(kind: ModuleKind) -> float:
    return DEFAULT_OFFLINE_TIMEOUT_S if kind in _OFFLINE_KINDS else DEFAULT_ONLINE_TIMEOUT_S


class HttpBackend:
    """Forwards requests to a model server speaking the wire protocol above."""

    def __init__(
        self,
        base_url: str,
        timeouts: Mapping[ModuleKind, float] | None = None,
        kinds: frozenset[ModuleKind] | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.timeouts = dict(timeouts or {})
        self.kinds = kinds  # None means all

    def supports(self, kind: ModuleKind) -> bool:
        return self.kinds is None or kind in self.kinds

    def timeout_for(self, kind: ModuleKind) -> float:
        return self.timeouts.get(kind, default_timeout(kind))

    def run(self, req: GenerationRequest) -> list[AssetPayload]:
        inputs = {}
        if req.input_image is not None:
            inputs["image"] = base64.b64encode(req.input_image).decode("ascii")
        if req.input_depth is not None:
            inputs["depth"] = base64.b64encode(req.input_depth).decode("ascii")
        if req.input_cloud is not None:
            inputs["cloud"] = base64.b64encode(req.input_cloud).decode("ascii")
        body = {
            "prompt": req.prompt,
            "seed": req.seed,
            "params": dict(req.params),
            "inputs": inputs,
        }
        url = f"{self.base_url}/{req.kind.kebab}"
        timeout = self.timeout_for(req.kind)
        try:
            response = httpx.post(url, json=body, timeout=timeout)
        except httpx.TimeoutException as e:
            raise Timeout(req.kind, timeout) from e
        except httpx.HTTPError as e:
            raise BackendUnavailable(f"{url}: {e}") from e
        if response.status_code != 200:
            raise BackendError(response.status_code, response.text)
        try:
            payload = response.json()
            assets = payload["assets"]
            out = []
            for entry in assets:
                out.append(
                    AssetPayload(
                        role=AssetRole(entry["role"]),
                        data=base64.b64decode(entry["data-base64"]),
                        media_type=entry.get("mime", "application/octet-stream"),
                    )
                )
            return out
        except (KeyError, ValueError, TypeError) as e:
            raise BadResponse(f"malformed backend response: {e}") from e


def http_forward(
    backend: HttpBackend, req: GenerationRequest, store: AssetStore
) -> GenerationResult:
    """Dispatch through the HTTP adapter with its per-kind timeout."""
    return dispatch(backend, req, store, timeout=backend.timeout_for(req.kind))


def enrich_prompt(
    prompt: str, scene_image: bytes, backend: Backend, store: AssetStore
) -> str:
    """Run the prompt-enrichment kind and return the longer prompt text."""
    req = GenerationRequest(
        kind=ModuleKind.PROMPT_ENRICH, prompt=prompt, input_image=scene_image
    )
    result = dispatch(backend, req, store)
    asset_id = result.asset_for(AssetRole.ENRICHED_PROMPT)
    return store.get(asset_id).decode("utf-8")
