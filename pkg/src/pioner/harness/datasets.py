"""Task dataset loading from the documented JSONL schemas.

One JSON object per line, every task:

    {"id": "s1", "image": "imgs/0001.png", "references": ["a dog"],
     "region": {"kind": "box", "box": [0, 0, 10, 10]},
     "image_size": [640, 480]}            # optional (width, height)

The region kind must match the task: trace -> trace, dense -> box,
region-set -> box_set, image -> image. Malformed lines are skipped and
counted, never fatal; a missing or empty file is.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, List, Optional, Tuple, Union

from ..errors import DatasetError, PionerError
from ..regionspec import parse_region_spec
from ..types import RegionSpec

TASKS = ("trace", "dense", "region-set", "image")
TASK_KINDS = {"trace": "trace", "dense": "box", "region-set": "box_set", "image": "image"}


@dataclass(frozen=True)
class TaskSample:
    id: str
    image: str
    region: RegionSpec
    references: Tuple[str, ...]
    image_size: Optional[Tuple[int, int]] = None  # original (width, height)


@dataclass
class SkipNote:
    record: str
    reason: str


class DatasetReader:
    """Lazy JSONL reader; iterate to stream samples, then inspect ``skipped``."""

    def __init__(self, task: str, path: Union[str, Path]):
        if task not in TASKS:
            raise DatasetError(f"unknown task {task!r}; expected one of {TASKS}")
        self.task = task
        self.path = Path(path)
        self.skipped: List[SkipNote] = []
        if not self.path.exists():
            raise DatasetError(f"dataset file not found: {self.path}")

    def __iter__(self) -> Iterator[TaskSample]:
        want_kind = TASK_KINDS[self.task]
        with open(self.path, "r", encoding="utf-8") as f:
            for line_no, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    yield self._parse_line(line, line_no, want_kind)
                except _Skip as s:
                    self.skipped.append(SkipNote(record=s.record, reason=s.reason))

    def _parse_line(self, line: str, line_no: int, want_kind: str) -> TaskSample:
        record_id = f"line {line_no}"
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise _Skip(record_id, f"invalid JSON: {e}")
        if not isinstance(obj, dict):
            raise _Skip(record_id, "record is not a JSON object")
        record_id = str(obj.get("id", record_id))
        image = obj.get("image")
        refs = obj.get("references")
        region_doc = obj.get("region")
        if not image or not isinstance(image, str):
            raise _Skip(record_id, "missing image reference")
        if not refs or not isinstance(refs, list) or not all(isinstance(r, str) for r in refs):
            raise _Skip(record_id, "references must be a nonempty string list")
        if region_doc is None:
            raise _Skip(record_id, "missing region")
        try:
            region = parse_region_spec(region_doc)
        except PionerError as e:
            raise _Skip(record_id, f"bad region: {e}")
        if region.kind != want_kind:
            raise _Skip(
                record_id, f"region kind {region.kind!r} does not match task {self.task!r}"
            )
        size = obj.get("image_size")
        image_size = None
        if size is not None:
            if (
                not isinstance(size, list)
                or len(size) != 2
                or not all(isinstance(v, int) and v > 0 for v in size)
            ):
                raise _Skip(record_id, f"bad image_size {size!r}")
            image_size = (size[0], size[1])
        return TaskSample(
            id=record_id,
            image=image,
            region=region,
            references=tuple(refs),
            image_size=image_size,
        )


class _Skip(Exception):
    def __init__(self, record: str, reason: str):
        super().__init__(reason)
        self.record = record
        self.reason = reason


def load_dataset(task: str, path: Union[str, Path]) -> DatasetReader:
    return DatasetReader(task, path)


def write_samples(samples, path: Union[str, Path]) -> None:
    """Serialize samples back to the JSONL schema (fixture/benchmark output)."""
    from ..regionspec import serialize_region_spec

    with open(path, "w", encoding="utf-8") as f:
        for s in samples:
            obj = {
                "id": s.id,
                "image": s.image,
                "references": list(s.references),
                "region": json.loads(serialize_region_spec(s.region)),
            }
            if s.image_size is not None:
                obj["image_size"] = list(s.image_size)
            f.write(json.dumps(obj, separators=(",", ":")) + "\n")
