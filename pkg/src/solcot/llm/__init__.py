"""LLM access: backends, prompt builders and response parsing."""

from .backends import (
    BackendConfig,
    BackendFailure,
    ExchangeLog,
    LlmClient,
    LlmExchange,
    MalformedBackendResponse,
    ScriptExhausted,
    Timeout,
    TransportError,
    generate,
    mock_response,
    resolve_base_url,
)
from .extract import (
    PLAUSIBLE_RANGE,
    ExtractionError,
    ImplausibleValue,
    NoNumericValue,
    extract_numeric_prediction,
)
from .prompts import (
    Example,
    Neighbor,
    PriorAttempt,
    Target,
    build_error_analysis_prompt,
    build_prediction_prompt,
    condense_corpus,
    format_descriptors,
)

__all__ = [
    "BackendConfig",
    "BackendFailure",
    "Example",
    "ExchangeLog",
    "ExtractionError",
    "ImplausibleValue",
    "LlmClient",
    "LlmExchange",
    "MalformedBackendResponse",
    "Neighbor",
    "NoNumericValue",
    "PLAUSIBLE_RANGE",
    "PriorAttempt",
    "ScriptExhausted",
    "Target",
    "Timeout",
    "TransportError",
    "build_error_analysis_prompt",
    "build_prediction_prompt",
    "condense_corpus",
    "extract_numeric_prediction",
    "format_descriptors",
    "generate",
    "mock_response",
    "resolve_base_url",
]
