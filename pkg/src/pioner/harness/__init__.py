from .converters import convert_entity_regions, convert_karpathy_split, convert_vg_regions
from .datasets import TASKS, DatasetReader, TaskSample, load_dataset, write_samples
from .runner import EvalReport, pipeline_runner, run_task

__all__ = [
    "TASKS",
    "TaskSample",
    "DatasetReader",
    "load_dataset",
    "write_samples",
    "run_task",
    "pipeline_runner",
    "EvalReport",
    "convert_vg_regions",
    "convert_karpathy_split",
    "convert_entity_regions",
]
