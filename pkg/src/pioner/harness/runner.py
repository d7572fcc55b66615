"""Task runner: caption every sample, score the records, emit a report."""
from __future__ import annotations

import json
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple, Union

from ..errors import DatasetError
from ..metrics import EvalRecord, bleu4, cider_d, dense_map, rouge_l
from ..types import Caption
from .datasets import DatasetReader, TaskSample, load_dataset

log = logging.getLogger(__name__)

# encoder(image_ref, size_hint) -> (grid, (width, height))
EncoderFn = Callable[[str, Optional[Tuple[int, int]]], tuple]
# captioner(sample, grid, size) -> Caption
CaptionerFn = Callable[[TaskSample, object, Optional[Tuple[int, int]]], Caption]


@dataclass
class EvalReport:
    task: str
    dataset: str
    n_samples: int
    metrics: Dict[str, float]
    dump_path: Optional[str]
    config: Dict[str, object]
    skipped: int = 0
    failures: int = 0
    per_sample: List[dict] = field(default_factory=list, repr=False)

    def to_json(self) -> str:
        body = {
            "task": self.task,
            "dataset": self.dataset,
            "n_samples": self.n_samples,
            "metrics": self.metrics,
            "dump_path": self.dump_path,
            "config": self.config,
            "skipped": self.skipped,
            "failures": self.failures,
        }
        return json.dumps(body, indent=2, sort_keys=True)

    def table(self) -> str:
        lines = [
            f"task: {self.task}   dataset: {self.dataset}",
            f"samples: {self.n_samples}   skipped: {self.skipped}   failures: {self.failures}",
            "-" * 44,
        ]
        for name, value in self.metrics.items():
            lines.append(f"{name:<24} {value:>12.6f}")
        return "\n".join(lines)


def pipeline_runner(pipeline) -> Tuple[EncoderFn, CaptionerFn]:
    """Adapt a CaptionPipeline to the runner's encoder/captioner functions."""

    def encoder(image_ref, size_hint):
        return pipeline.encode(image_ref, image_size=size_hint)

    def captioner(sample, grid, size):
        return pipeline.caption_grid(grid, size, sample.region)

    return encoder, captioner


def run_task(
    task: str,
    dataset: Union[str, Path, DatasetReader],
    encoder: EncoderFn,
    captioner: CaptionerFn,
    similarity=None,
    dump_path: Optional[Union[str, Path]] = None,
    report_path: Optional[Union[str, Path]] = None,
    config_snapshot: Optional[dict] = None,
    jobs: int = 1,
) -> EvalReport:
    """Caption and score one dataset.

    Patch grids are cached per image, so multi-region datasets run one
    backbone pass per distinct image. Per-sample failures score as empty
    captions instead of being excluded; only setup problems abort.
    """
    reader = dataset if isinstance(dataset, DatasetReader) else load_dataset(task, dataset)
    samples = list(reader)
    if not samples:
        raise DatasetError(
            f"dataset {reader.path} yielded no valid samples "
            f"({len(reader.skipped)} skipped)"
        )

    cache: Dict[str, tuple] = {}
    cache_lock = threading.Lock()
    key_locks: Dict[str, threading.Lock] = {}

    def grid_for(sample: TaskSample):
        key = sample.image
        with cache_lock:
            if key in cache:
                return cache[key]
            lock = key_locks.setdefault(key, threading.Lock())
        with lock:  # single writer per image
            with cache_lock:
                if key in cache:
                    return cache[key]
            value = encoder(sample.image, sample.image_size)
            with cache_lock:
                cache[key] = value
            return value

    failures: List[str] = []

    def process(sample: TaskSample) -> Tuple[Caption, Optional[str]]:
        try:
            grid, size = grid_for(sample)
            return captioner(sample, grid, size), None
        except Exception as e:  # sample-level failure, not fatal
            return Caption(text="", empty=True), f"{sample.id}: {e}"

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(process, samples))
    else:
        outcomes = [process(s) for s in samples]

    records: List[EvalRecord] = []
    for sample, (caption, failure) in zip(samples, outcomes):
        if failure:
            failures.append(failure)
            log.warning("sample failed, scored as empty caption: %s", failure)
        records.append(
            EvalRecord(id=sample.id, candidate=caption.text, references=sample.references)
        )

    cider_corpus, cider_each = cider_d(records)
    metrics: Dict[str, float] = {
        "cider_d": cider_corpus,
        "bleu4": bleu4(records),
        "rouge_l": rouge_l(records),
    }
    if task == "dense":
        metrics["dense_map"] = dense_map(records, similarity)

    dump_str = None
    if dump_path is not None:
        dump_str = str(dump_path)
        with open(dump_path, "w", encoding="utf-8") as f:
            for sample, record, score, (caption, _) in zip(
                samples, records, cider_each, outcomes
            ):
                f.write(
                    json.dumps(
                        {
                            "id": record.id,
                            "image": sample.image,
                            "candidate": record.candidate,
                            "references": list(record.references),
                            "cider_d": score,
                            "empty": caption.empty,
                        },
                        separators=(",", ":"),
                    )
                    + "\n"
                )

    report = EvalReport(
        task=task,
        dataset=str(reader.path),
        n_samples=len(samples),
        metrics=metrics,
        dump_path=dump_str,
        config=config_snapshot or {},
        skipped=len(reader.skipped),
        failures=len(failures),
        per_sample=[
            {"id": r.id, "candidate": r.candidate, "cider_d": s}
            for r, s in zip(records, cider_each)
        ],
    )
    if report_path is not None:
        Path(report_path).write_text(report.to_json() + "\n", encoding="utf-8")
    return report
