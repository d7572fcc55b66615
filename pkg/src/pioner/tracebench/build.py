"""Benchmark assembly: split, trim, rewrite, filter, emit task JSONL."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Tuple, Union

from ..errors import LLMError, ValidationError
from .llm import LLMClient, TokenBucket, build_prompt, parse_rewrite
from .narratives import NarrativeRecord, TracePoint, split_by_sentence, trim_trace

VALID = "valid"
INVALID = "invalid"
DISCARDED_EMPTY = "discarded_empty"
DISCARDED_ERROR = "discarded_error"


@dataclass(frozen=True)
class TraceSample:
    image_id: str
    points: Tuple[TracePoint, ...]
    sentence: str
    caption: Optional[str]
    status: str
    reason: Optional[str] = None


@dataclass
class BuildStats:
    records: int = 0
    bad_records: int = 0
    sentences: int = 0
    valid: int = 0
    invalid: int = 0
    empty_traces: int = 0
    llm_failures: int = 0
    discarded_images: int = 0
    errors: List[str] = field(default_factory=list)

    def asdict(self) -> dict:
        return asdict(self)


def rewrite_caption(sentence: str, llm: LLMClient, retries: int = 2) -> Optional[str]:
    """Rewrite one sentence; None marks it invalid. Retries transient failures."""
    prompt = build_prompt(sentence)
    last: Optional[Exception] = None
    for _ in range(retries + 1):
        try:
            return parse_rewrite(llm.complete(prompt))
        except LLMError as e:
            last = e
    raise LLMError(f"rewrite failed after {retries + 1} attempts: {last}")


def build_benchmark(
    records: Iterable[NarrativeRecord],
    llm: LLMClient,
    out_path: Optional[Union[str, Path]] = None,
    retries: int = 2,
    rate_limit: Optional[TokenBucket] = None,
) -> Tuple[List[TraceSample], BuildStats]:
    """Build trace-captioning samples from narrative records.

    Composes sentence splitting, 15% trimming, and LLM rewriting; invalid
    and empty-trace sentences are dropped, and images left with no valid
    sample are counted as discarded. ``out_path`` receives JSONL in the
    harness trace-task schema.
    """
    stats = BuildStats()
    samples: List[TraceSample] = []
    for record in records:
        if isinstance(record, Exception):  # pragma: no cover - defensive
            stats.bad_records += 1
            continue
        stats.records += 1
        image_valid = 0
        try:
            pieces = split_by_sentence(record)
        except ValidationError as e:
            stats.bad_records += 1
            stats.errors.append(str(e))
            continue
        for sentence, sub_trace in pieces:
            stats.sentences += 1
            if not sub_trace:
                stats.empty_traces += 1
                samples.append(
                    TraceSample(
                        image_id=record.image_id,
                        points=(),
                        sentence=sentence,
                        caption=None,
                        status=DISCARDED_EMPTY,
                    )
                )
                continue
            trimmed = tuple(trim_trace(sub_trace))
            if rate_limit is not None:
                rate_limit.acquire()
            try:
                caption = rewrite_caption(sentence, llm, retries=retries)
            except LLMError as e:
                stats.llm_failures += 1
                stats.errors.append(f"{record.image_id}: {e}")
                samples.append(
                    TraceSample(
                        image_id=record.image_id,
                        points=trimmed,
                        sentence=sentence,
                        caption=None,
                        status=DISCARDED_ERROR,
                        reason=str(e),
                    )
                )
                continue
            if caption is None:
                stats.invalid += 1
                samples.append(
                    TraceSample(
                        image_id=record.image_id,
                        points=trimmed,
                        sentence=sentence,
                        caption=None,
                        status=INVALID,
                    )
                )
                continue
            stats.valid += 1
            image_valid += 1
            samples.append(
                TraceSample(
                    image_id=record.image_id,
                    points=trimmed,
                    sentence=sentence,
                    caption=caption,
                    status=VALID,
                )
            )
        if image_valid == 0:
            stats.discarded_images += 1

    if out_path is not None:
        write_benchmark(samples, out_path)
    return samples, stats


def write_benchmark(samples: Iterable[TraceSample], path: Union[str, Path]) -> int:
    """Emit valid samples as harness-compatible trace-task JSONL."""
    n = 0
    counters: dict = {}
    with open(path, "w", encoding="utf-8") as f:
        for s in samples:
            if s.status != VALID:
                continue
            k = counters.get(s.image_id, 0)
            counters[s.image_id] = k + 1
            obj = {
                "id": f"{s.image_id}#{k}",
                "image": s.image_id,
                "references": [s.caption],
                "region": {
                    "kind": "trace",
                    "points": [[p.x, p.y] for p in s.points],
                },
            }
            f.write(json.dumps(obj, separators=(",", ":")) + "\n")
            n += 1
    return n
