"""Greedy and beam decoding from a prefix embedding."""
from __future__ import annotations

from typing import List, Optional, Tuple

import numpy as np
import torch
import torch.nn.functional as F

from ..errors import ValidationError
from ..types import Caption
from .checkpoint import DecoderCheckpoint
from .tokenizer import EOS

DEFAULT_MAX_LEN = 64


def generate(
    prefix: np.ndarray,
    ckpt: DecoderCheckpoint,
    strategy: str = "greedy",
    beam_width: int = 4,
    max_len: int = DEFAULT_MAX_LEN,
) -> Caption:
    """Decode a caption from a prefix vector; a pure function of its inputs.

    Greedy decoding is deterministic; beam search returns the completion
    with the highest total log-probability. If nothing but end-of-text is
    produced, an empty-flagged Caption is returned rather than raising.
    """
    v = np.asarray(prefix, dtype=np.float64).reshape(-1)
    if v.shape[0] != ckpt.prefix_dim:
        raise ValidationError(f"prefix dim {v.shape[0]} != checkpoint dim {ckpt.prefix_dim}")
    if not np.isfinite(v).all():
        raise ValidationError("prefix vector has non-finite entries")
    max_len = min(max_len, ckpt.config.max_seq - 1)
    p = torch.tensor(v, dtype=torch.float32).unsqueeze(0)

    with torch.no_grad():
        if strategy == "greedy":
            ids, score = _greedy(p, ckpt, max_len)
        elif strategy == "beam":
            if beam_width < 1:
                raise ValidationError("beam width must be >= 1")
            ids, score = _beam(p, ckpt, beam_width, max_len)
        else:
            raise ValidationError(f"unknown generation strategy {strategy!r}")

    text = ckpt.tokenizer.decode(ids)
    if not text:
        return Caption(text="", token_ids=tuple(ids), score=score, empty=True)
    return Caption(text=text, token_ids=tuple(ids), score=score)


def _greedy(prefix: torch.Tensor, ckpt: DecoderCheckpoint, max_len: int) -> Tuple[List[int], float]:
    ids: List[int] = []
    score = 0.0
    for _ in range(max_len):
        tokens = torch.tensor([ids], dtype=torch.long)
        logits = ckpt.model(prefix, tokens)[0, -1]
        logprobs = F.log_softmax(logits, dim=-1)
        nxt = int(torch.argmax(logprobs).item())
        score += float(logprobs[nxt].item())
        if nxt == EOS:
            break
        ids.append(nxt)
    return ids, score


def _beam(
    prefix: torch.Tensor, ckpt: DecoderCheckpoint, width: int, max_len: int
) -> Tuple[List[int], float]:
    live: List[Tuple[List[int], float]] = [([], 0.0)]
    done: List[Tuple[List[int], float]] = []
    for _ in range(max_len):
        candidates: List[Tuple[List[int], float]] = []
        for ids, score in live:
            tokens = torch.tensor([ids], dtype=torch.long)
            logprobs = F.log_softmax(ckpt.model(prefix, tokens)[0, -1], dim=-1)
            top = torch.topk(logprobs, min(width, logprobs.shape[0]))
            for lp, tok in zip(top.values.tolist(), top.indices.tolist()):
                candidates.append((ids + [tok], score + lp))
        candidates.sort(key=lambda c: -c[1])
        live = []
        for ids, score in candidates[:width]:
            if ids[-1] == EOS:
                done.append((ids[:-1], score))
            else:
                live.append((ids, score))
        if not live:
            break
    done.extend(live)  # ran out of length before EOS
    best_ids, best_score = max(done, key=lambda c: c[1])
    return best_ids, best_score
