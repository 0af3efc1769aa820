from .base import (
    AssetPayload,
    AssetRole,
    Backend,
    BackendError,
    BackendFailure,
    BackendUnavailable,
    BadResponse,
    DimensionMismatch,
    EmptyPrompt,
    GenerationRequest,
    GenerationResult,
    MalformedRequest,
    ModuleKind,
    Timeout,
    UnsupportedKind,
    VARIANT_COUNT,
    VariantError,
    VariantSet,
    dispatch,
    generate_variants,
    validate_request,
)
from .hashing import SplitMix64, fnv1a64, hash01
from .http import HttpBackend, default_timeout, enrich_prompt, http_forward
from .mock import (
    ENRICH_VOCABULARY,
    MockBackend,
    mock_enrich,
    mock_image_to_3d,
    mock_instruct_image_edit,
    mock_splat_edit,
    mock_stylize,
    mock_text_to_3d_preview,
    prompt_hue_degrees,
    text_to_3d_primitives,
)

__all__ = [
    "AssetPayload",
    "AssetRole",
    "Backend",
    "BackendError",
    "BackendFailure",
    "BackendUnavailable",
    "BadResponse",
    "DimensionMismatch",
    "EmptyPrompt",
    "ENRICH_VOCABULARY",
    "GenerationRequest",
    "GenerationResult",
    "HttpBackend",
    "MalformedRequest",
    "MockBackend",
    "ModuleKind",
    "SplitMix64",
    "Timeout",
    "UnsupportedKind",
    "VARIANT_COUNT",
    "VariantError",
    "VariantSet",
    "default_timeout",
    "dispatch",
    "enrich_prompt",
    "fnv1a64",
    "generate_variants",
    "hash01",
    "http_forward",
    "mock_enrich",
    "mock_image_to_3d",
    "mock_instruct_image_edit",
    "mock_splat_edit",
    "mock_stylize",
    "mock_text_to_3d_preview",
    "prompt_hue_degrees",
    "text_to_3d_primitives",
    "validate_request",
]
