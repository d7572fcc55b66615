from .build import (
    DISCARDED_EMPTY,
    DISCARDED_ERROR,
    INVALID,
    VALID,
    BuildStats,
    TraceSample,
    build_benchmark,
    rewrite_caption,
    write_benchmark,
)
from .llm import (
    INVALID_MARKER,
    REWRITE_PROMPT,
    HTTPLLMClient,
    LLMClient,
    RecordedLLMClient,
    TokenBucket,
    build_prompt,
    parse_rewrite,
)
from .narratives import (
    NarrativeRecord,
    TracePoint,
    Utterance,
    load_narratives,
    parse_narrative,
    split_by_sentence,
    trim_trace,
)

__all__ = [
    "NarrativeRecord",
    "Utterance",
    "TracePoint",
    "load_narratives",
    "parse_narrative",
    "split_by_sentence",
    "trim_trace",
    "TraceSample",
    "BuildStats",
    "build_benchmark",
    "rewrite_caption",
    "write_benchmark",
    "LLMClient",
    "HTTPLLMClient",
    "RecordedLLMClient",
    "TokenBucket",
    "build_prompt",
    "parse_rewrite",
    "REWRITE_PROMPT",
    "INVALID_MARKER",
    "VALID",
    "INVALID",
    "DISCARDED_EMPTY",
    "DISCARDED_ERROR",
]
