"""Narrative records: sentence-aligned trace splitting and trimming.

The input is the documented subset of localized-narrative JSONL records:

    {"image_id": "000001", "timed_caption": [{"utterance": "...",
     "start_time": 0.0, "end_time": 1.2}, ...],
     "traces": [[{"x": 0.1, "y": 0.2, "t": 0.05}, ...], ...]}

Coordinates may be absolute pixels or normalized; they are passed through
untouched (the caption pipeline clamps and rescales at selection time).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, List, Sequence, Tuple, Union

from ..errors import ValidationError

TRIM_FRACTION = 0.15

_TERMINALS = (".", "!", "?")


@dataclass(frozen=True)
class Utterance:
    text: str
    start: float
    end: float


@dataclass(frozen=True)
class TracePoint:
    x: float
    y: float
    t: float


@dataclass(frozen=True)
class NarrativeRecord:
    image_id: str
    utterances: Tuple[Utterance, ...]
    points: Tuple[TracePoint, ...]  # flattened trace segments, original order

    def __post_init__(self):
        for p in self.points:
            if not all(math.isfinite(v) for v in (p.x, p.y, p.t)):
                raise ValidationError(f"{self.image_id}: non-finite trace point")


def parse_narrative(obj: dict) -> NarrativeRecord:
    image_id = obj.get("image_id")
    if not image_id:
        raise ValidationError("narrative record missing image_id")
    raw_utts = obj.get("timed_caption")
    if not raw_utts:
        raise ValidationError(f"{image_id}: missing timed_caption")
    utterances = []
    for u in raw_utts:
        try:
            utterances.append(
                Utterance(text=str(u["utterance"]), start=float(u["start_time"]), end=float(u["end_time"]))
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationError(f"{image_id}: bad utterance segment: {e}") from e
    points: List[TracePoint] = []
    for segment in obj.get("traces", []):
        last_t = -math.inf
        for p in segment:
            try:
                tp = TracePoint(x=float(p["x"]), y=float(p["y"]), t=float(p["t"]))
            except (KeyError, TypeError, ValueError) as e:
                raise ValidationError(f"{image_id}: bad trace point: {e}") from e
            if tp.t < last_t:
                raise ValidationError(f"{image_id}: trace timestamps decrease")
            last_t = tp.t
            points.append(tp)
    return NarrativeRecord(
        image_id=str(image_id), utterances=tuple(utterances), points=tuple(points)
    )


def load_narratives(path: Union[str, Path]) -> Iterator[NarrativeRecord]:
    """Yields records; raises ValidationError on a malformed line (caller counts)."""
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ValidationError(f"line {line_no}: invalid JSON: {e}") from e
            yield parse_narrative(obj)


def split_by_sentence(record: NarrativeRecord) -> List[Tuple[str, List[TracePoint]]]:
    """One (sentence, sub-trace) pair per sentence.

    Sentences follow the narrative's own utterance boundaries: segments
    accumulate until one ends with terminal punctuation. A sub-trace
    holds exactly the points whose timestamp lies inside the sentence's
    [start, end] window; out-of-window points belong to no sentence.
    """
    sentences: List[Tuple[str, float, float]] = []
    texts: List[str] = []
    start = None
    for utt in record.utterances:
        if start is None:
            start = utt.start
        texts.append(utt.text.strip())
        if utt.text.strip().endswith(_TERMINALS):
            sentences.append((" ".join(t for t in texts if t), start, utt.end))
            texts, start = [], None
    if texts:
        sentences.append((" ".join(t for t in texts if t), start, record.utterances[-1].end))
    return [
        (text, [p for p in record.points if s <= p.t <= e])
        for text, s, e in sentences
    ]


def trim_trace(points: Sequence[TracePoint]) -> List[TracePoint]:
    """Drop floor(0.15 * L) points from each end of the trace.

    The remainder is always a contiguous subsequence; a trace can never
    trim to nothing (the rule removes under a third of it), but the
    middle point is kept as a guard should that invariant ever move.
    """
    pts = list(points)
    if not pts:
        raise ValidationError("cannot trim an empty trace")
    k = 15 * len(pts) // 100  # floor(0.15 L), exact
    kept = pts[k : len(pts) - k]
    if not kept:  # pragma: no cover - unreachable for L >= 1
        kept = [pts[len(pts) // 2]]
    return kept
