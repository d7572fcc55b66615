"""Decoder checkpoint container and its on-disk archive."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Union

import torch

from ..errors import CheckpointError
from .model import DecoderConfig, PrefixDecoder
from .tokenizer import WordTokenizer

FORMAT = "pioner-ckpt/v1"


@dataclass
class DecoderCheckpoint:
    """A trained decoder with its frozen tokenizer and serving metadata.

    ``mitigation_mode`` records how the decoder was trained so a
    memory-trained decoder is never silently served without its bank.
    """

    model: PrefixDecoder
    tokenizer: WordTokenizer
    config: DecoderConfig
    mitigation_mode: str
    train_meta: dict

    @property
    def prefix_dim(self) -> int:
        return self.config.prefix_dim


def save_checkpoint(ckpt: DecoderCheckpoint, path: Union[str, Path]) -> None:
    torch.save(
        {
            "format": FORMAT,
            "mitigation_mode": ckpt.mitigation_mode,
            "config": ckpt.config.asdict(),
            "state": ckpt.model.state_dict(),
            "tokenizer": ckpt.tokenizer.state(),
            "train_meta": ckpt.train_meta,
        },
        path,
    )


def load_checkpoint(path: Union[str, Path]) -> DecoderCheckpoint:
    try:
        blob = torch.load(path, map_location="cpu", weights_only=False)
    except Exception as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e
    if not isinstance(blob, dict) or blob.get("format") != FORMAT:
        raise CheckpointError(f"{path} is not a {FORMAT} checkpoint")
    cfg = DecoderConfig(**blob["config"])
    model = PrefixDecoder(cfg)
    model.load_state_dict(blob["state"])
    model.eval()
    return DecoderCheckpoint(
        model=model,
        tokenizer=WordTokenizer.from_state(blob["tokenizer"]),
        config=cfg,
        mitigation_mode=blob["mitigation_mode"],
        train_meta=blob.get("train_meta", {}),
    )
