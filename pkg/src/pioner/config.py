"""Flat dotted-key configuration shared by the CLI, service, and harness.

Config files are JSON objects whose keys are dotted paths, e.g.::

    {"gap.tau": 0.01, "backbone.name": "synthetic", "service.port": 8080}

An empty file (or empty object) yields all defaults. Unknown keys and
mistyped values raise :class:`ConfigError` naming the offending key.
Keys under ``plugin.`` register external scorer commands by name.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, fields
from typing import Any, Dict, Mapping, Optional

from .errors import ConfigError

GAP_MODES = ("memory", "noise", "none")
AGGREGATION_MODES = ("uniform", "gaussian", "attention")
STRATEGIES = ("greedy", "beam")

# Noise-variance presets; "viecap-regime" mirrors the external-knowledge
# training schedule (15 epochs, batch 80, lr 2e-5, sigma^2 = 16e-3).
PRESETS = {
    "viecap-regime": {"gap.sigma2": 16e-3},
}
PRESET_TRAIN_PARAMS = {
    "viecap-regime": {"epochs": 15, "batch_size": 80, "lr": 2e-5},
}


@dataclass(frozen=True)
class Config:
    backbone_name: str = "synthetic"
    backbone_dim: int = 64
    backbone_patch_size: int = 14
    backbone_input_resolution: int = 518
    backbone_grids_dir: Optional[str] = None
    gap_mode: str = "memory"
    gap_tau: float = 0.01
    gap_sigma2: float = 0.08
    gap_preset: Optional[str] = None
    aggregation: str = "uniform"
    decoder_max_len: int = 64
    decoder_strategy: str = "greedy"
    decoder_beam_width: int = 4
    service_port: int = 8000
    service_cache_bytes: int = 256 * 1024 * 1024
    service_max_image_bytes: int = 16 * 1024 * 1024
    service_cors_origin: str = "*"
    service_workers: int = 8
    service_queue: int = 64
    metrics_dense_similarity: str = "rouge-l"
    llm_url: Optional[str] = None
    llm_retries: int = 2
    llm_timeout: float = 30.0
    eval_jobs: int = 1
    plugins: Dict[str, str] = field(default_factory=dict)

    def asdict(self) -> Dict[str, Any]:
        """Dotted-key snapshot, plugin commands included."""
        out = {key: getattr(self, attr) for key, (attr, _, _) in _KEYS.items()}
        for name, cmd in self.plugins.items():
            out[f"plugin.{name}"] = cmd
        return out

    def redacted(self) -> Dict[str, Any]:
        """Snapshot safe to expose over HTTP (drops endpoint URLs)."""
        snap = self.asdict()
        for key in list(snap):
            if key.startswith("llm.") or key.startswith("plugin."):
                snap[key] = "<redacted>" if snap[key] else None
        return snap


def _positive(x) -> bool:
    return x > 0


def _nonnegative(x) -> bool:
    return x >= 0


_KEYS: Dict[str, tuple] = {
    # key -> (attribute, type, validator or allowed values)
    "backbone.name": ("backbone_name", str, None),
    "backbone.dim": ("backbone_dim", int, _positive),
    "backbone.patch_size": ("backbone_patch_size", int, _positive),
    "backbone.input_resolution": ("backbone_input_resolution", int, _positive),
    "backbone.grids_dir": ("backbone_grids_dir", str, None),
    "gap.mode": ("gap_mode", str, GAP_MODES),
    "gap.tau": ("gap_tau", float, _positive),
    "gap.sigma2": ("gap_sigma2", float, _nonnegative),
    "gap.preset": ("gap_preset", str, tuple(PRESETS)),
    "aggregation": ("aggregation", str, AGGREGATION_MODES),
    "decoder.max_len": ("decoder_max_len", int, _positive),
    "decoder.strategy": ("decoder_strategy", str, STRATEGIES),
    "decoder.beam_width": ("decoder_beam_width", int, _positive),
    "service.port": ("service_port", int, _positive),
    "service.cache_bytes": ("service_cache_bytes", int, _positive),
    "service.max_image_bytes": ("service_max_image_bytes", int, _positive),
    "service.cors_origin": ("service_cors_origin", str, None),
    "service.workers": ("service_workers", int, _positive),
    "service.queue": ("service_queue", int, _nonnegative),
    "metrics.dense_similarity": ("metrics_dense_similarity", str, None),
    "llm.url": ("llm_url", str, None),
    "llm.retries": ("llm_retries", int, _nonnegative),
    "llm.timeout": ("llm_timeout", float, _positive),
    "eval.jobs": ("eval_jobs", int, _positive),
}


def config_from_dict(doc: Mapping[str, Any]) -> Config:
    """Build a Config from a flat dotted-key mapping."""
    values: Dict[str, Any] = {}
    plugins: Dict[str, str] = {}
    preset = doc.get("gap.preset")
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"gap.preset: unknown preset {preset!r}")
        for k, v in PRESETS[preset].items():
            values[_KEYS[k][0]] = v
    for key, raw in doc.items():
        if key.startswith("plugin."):
            name = key[len("plugin."):]
            if not name or not isinstance(raw, str) or not raw.strip():
                raise ConfigError(f"{key}: plugin command must be a nonempty string")
            plugins[name] = raw
            continue
        if key not in _KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        attr, typ, allowed = _KEYS[key]
        values[attr] = _coerce(key, raw, typ, allowed)
    return Config(plugins=plugins, **values)


def _coerce(key: str, raw: Any, typ: type, allowed) -> Any:
    if typ is float:
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise ConfigError(f"{key}: expected a number, got {raw!r}")
        value = float(raw)
        if not math.isfinite(value):
            raise ConfigError(f"{key}: value must be finite")
    elif typ is int:
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise ConfigError(f"{key}: expected an integer, got {raw!r}")
        value = raw
    elif typ is str:
        if not isinstance(raw, str):
            raise ConfigError(f"{key}: expected a string, got {raw!r}")
        value = raw
    else:  # pragma: no cover - registry is static
        raise ConfigError(f"{key}: unsupported type")
    if allowed is None:
        return value
    if callable(allowed):
        if not allowed(value):
            raise ConfigError(f"{key}: invalid value {value!r}")
    elif value not in allowed:
        raise ConfigError(f"{key}: must be one of {tuple(allowed)}, got {value!r}")
    return value


def load_config(path: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None) -> Config:
    """Load a config file with defaults applied; ``overrides`` win over the file.

    When ``path`` is None, the PIONER_CONFIG environment variable is
    consulted; if that is unset too, defaults (plus overrides) are used.
    """
    if path is None:
        path = os.environ.get("PIONER_CONFIG") or None
    doc: Dict[str, Any] = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as f:
                text = f.read().strip()
        except OSError as e:
            raise ConfigError(f"cannot read config file {path}: {e}") from e
        if text:
            try:
                parsed = json.loads(text)
            except json.JSONDecodeError as e:
                raise ConfigError(f"config file {path} is not valid JSON: {e}") from e
            if not isinstance(parsed, dict):
                raise ConfigError(f"config file {path} must hold a JSON object")
            doc = parsed
    if overrides:
        doc.update({k: v for k, v in overrides.items() if v is not None})
    return config_from_dict(doc)
