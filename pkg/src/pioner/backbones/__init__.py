"""Backbone adapters and the name registry used by config ("backbone.name")."""
from __future__ import annotations

from typing import Callable, Dict

from ..config import Config
from ..errors import ConfigError
from .base import BackboneAdapter, decode_image
from .gridfile import grid_from_bytes, load_grid, save_grid
from .precomputed import PrecomputedAdapter
from .synthetic import SyntheticAdapter

__all__ = [
    "BackboneAdapter",
    "SyntheticAdapter",
    "PrecomputedAdapter",
    "save_grid",
    "load_grid",
    "grid_from_bytes",
    "decode_image",
    "get_adapter",
    "register_adapter",
]

_REGISTRY: Dict[str, Callable[[Config], BackboneAdapter]] = {}


def register_adapter(name: str, factory: Callable[[Config], BackboneAdapter]) -> None:
    """Register an adapter factory; real model-backed adapters plug in here."""
    _REGISTRY[name] = factory


def get_adapter(config: Config) -> BackboneAdapter:
    name = config.backbone_name
    if name == "synthetic":
        return SyntheticAdapter(
            embedding_dim=config.backbone_dim,
            patch_size=config.backbone_patch_size,
            input_resolution=config.backbone_input_resolution,
        )
    if name == "precomputed":
        if not config.backbone_grids_dir:
            raise ConfigError("backbone.grids_dir: required for the precomputed backbone")
        return PrecomputedAdapter(config.backbone_grids_dir)
    if name in _REGISTRY:
        return _REGISTRY[name](config)
    raise ConfigError(f"backbone.name: unknown backbone {name!r}")
