from .cache import ResponseCache, TranscriptRecord, TranscriptReplay, TranscriptWriter, load_transcript
from .client import (
    EndpointPolicy,
    LLMClientFactory,
    LlmExchange,
    ZeroShotClassifier,
    classify,
    content_to_text,
    translate_openai_error,
)
from .parser import match_labels, parse_response
from .pipeline import RateLimiter, classify_many
from .prompts import (
    DEFAULT_MODEL,
    DEFAULT_TEMPLATE,
    DecodingParams,
    PromptBundle,
    PromptTemplate,
    build_prompt,
    load_template,
    render_label_lines,
)

__all__ = [
    "DEFAULT_MODEL",
    "DEFAULT_TEMPLATE",
    "DecodingParams",
    "EndpointPolicy",
    "LLMClientFactory",
    "LlmExchange",
    "PromptBundle",
    "PromptTemplate",
    "RateLimiter",
    "ResponseCache",
    "TranscriptRecord",
    "TranscriptReplay",
    "TranscriptWriter",
    "ZeroShotClassifier",
    "build_prompt",
    "classify",
    "classify_many",
    "content_to_text",
    "load_template",
    "load_transcript",
    "match_labels",
    "parse_response",
    "render_label_lines",
    "translate_openai_error",
]
