"""Patch-centric zero-shot region captioning toolkit."""

from .config import Config, load_config
from .regionspec import parse_region_spec, serialize_region_spec
from .types import Caption, PatchGrid, PatchSelection, RegionEmbedding, RegionSpec

__version__ = "0.1.0"

__all__ = [
    "Config",
    "load_config",
    "parse_region_spec",
    "serialize_region_spec",
    "PatchGrid",
    "RegionSpec",
    "PatchSelection",
    "RegionEmbedding",
    "Caption",
    "__version__",
]
