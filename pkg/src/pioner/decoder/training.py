"""Text-only decoder training: reconstruct captions from their embeddings.

Noise-mode training perturbs the conditioning embedding fresh for every
example in every epoch; memory mode and the no-mitigation baseline
condition on the clean text embedding (the memory projection happens at
inference time only).
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
import torch
import torch.nn.functional as F

from ..errors import CapabilityError, TrainError
from ..gap import NoiseConfig, NoiseInjector
from .checkpoint import DecoderCheckpoint
from .model import DecoderConfig, PrefixDecoder
from .tokenizer import EOS, PAD, WordTokenizer

MITIGATION_MODES = ("memory", "noise", "none")


@dataclass(frozen=True)
class TrainSpec:
    corpus: Tuple[str, ...]
    epochs: int = 10
    lr: float = 1e-5
    weight_decay: float = 0.01
    batch_size: int = 64
    mitigation: str = "memory"
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    seed: int = 0
    deterministic: bool = True
    # architecture knobs; defaults fit the reference recipe, tests shrink them
    d_model: int = 256
    n_layer: int = 4
    n_head: int = 4
    max_len: int = 64

    def validate(self) -> None:
        if not self.corpus:
            raise TrainError("corpus must be nonempty")
        if self.epochs < 1:
            raise TrainError("epochs must be >= 1")
        if not self.lr > 0:
            raise TrainError("lr must be positive")
        if self.batch_size < 1:
            raise TrainError("batch_size must be >= 1")
        if self.mitigation not in MITIGATION_MODES:
            raise TrainError(f"unknown mitigation mode {self.mitigation!r}")


def corpus_id(corpus: Sequence[str]) -> str:
    h = hashlib.sha256()
    for text in corpus:
        h.update(text.encode("utf-8"))
        h.update(b"\x00")
    return h.hexdigest()[:16]


def sequence_loss(
    model: PrefixDecoder, prefix: torch.Tensor, tokens: torch.Tensor
) -> torch.Tensor:
    """Cross-entropy of tokens given the prefix; pad targets are ignored.

    ``tokens`` already ends with EOS (then padding). The prefix position
    predicts the first token; every later position predicts its successor.
    """
    inputs = tokens[:, :-1] if tokens.shape[1] > 1 else tokens[:, :0]
    logits = model(prefix, inputs)
    return F.cross_entropy(
        logits.reshape(-1, logits.shape[-1]), tokens.reshape(-1), ignore_index=PAD
    )


def prefix_gradient(
    model: PrefixDecoder, prefix: torch.Tensor, tokens: torch.Tensor
) -> torch.Tensor:
    """Analytic gradient of the sequence loss w.r.t. the prefix vector."""
    p = prefix.detach().clone().requires_grad_(True)
    loss = sequence_loss(model, p, tokens)
    (grad,) = torch.autograd.grad(loss, p)
    return grad.detach()


def _encode_batch(tokenizer: WordTokenizer, texts: Sequence[str]) -> torch.Tensor:
    rows = [tokenizer.encode(t) + [EOS] for t in texts]
    width = max(len(r) for r in rows)
    out = torch.full((len(rows), width), PAD, dtype=torch.long)
    for i, r in enumerate(rows):
        out[i, : len(r)] = torch.tensor(r, dtype=torch.long)
    return out


def train(spec: TrainSpec, adapter) -> DecoderCheckpoint:
    """Train a decoder on text only; returns a ready-to-serve checkpoint."""
    spec.validate()
    if not adapter.has_text_encoder:
        raise CapabilityError(f"adapter {adapter.name!r} has no text encoder")

    embeddings = np.stack(
        [np.asarray(adapter.encode_text(t), dtype=np.float64) for t in spec.corpus]
    )
    tokenizer = WordTokenizer.from_corpus(spec.corpus)
    longest = max(len(tokenizer.encode(t)) for t in spec.corpus) + 2
    cfg = DecoderConfig(
        vocab_size=tokenizer.vocab_size,
        prefix_dim=embeddings.shape[1],
        d_model=spec.d_model,
        n_layer=spec.n_layer,
        n_head=spec.n_head,
        max_seq=max(spec.max_len + 2, longest),
    )

    was_deterministic = torch.are_deterministic_algorithms_enabled()
    torch.use_deterministic_algorithms(spec.deterministic)
    try:
        torch.manual_seed(spec.seed)
        model = PrefixDecoder(cfg)
        model.train()
        optimizer = torch.optim.AdamW(
            model.parameters(), lr=spec.lr, weight_decay=spec.weight_decay
        )
        injector = NoiseInjector(spec.noise) if spec.mitigation == "noise" else None
        shuffler = torch.Generator().manual_seed(spec.seed)
        n = len(spec.corpus)
        final_loss = float("nan")
        for epoch in range(spec.epochs):
            order = torch.randperm(n, generator=shuffler).tolist()
            for start in range(0, n, spec.batch_size):
                batch_ids = order[start : start + spec.batch_size]
                cond = embeddings[batch_ids]
                if injector is not None:
                    cond = np.stack([injector.perturb(e) for e in cond])
                prefix = torch.tensor(cond, dtype=torch.float32)
                tokens = _encode_batch(tokenizer, [spec.corpus[i] for i in batch_ids])
                loss = sequence_loss(model, prefix, tokens)
                if not torch.isfinite(loss):
                    raise TrainError(
                        f"non-finite loss {loss.item()} at epoch {epoch}, "
                        f"batch starting {start} (lr={spec.lr})"
                    )
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()
                final_loss = float(loss.item())
    finally:
        torch.use_deterministic_algorithms(was_deterministic)

    model.eval()
    meta = {
        "corpus_id": corpus_id(spec.corpus),
        "n_texts": len(spec.corpus),
        "epochs": spec.epochs,
        "lr": spec.lr,
        "weight_decay": spec.weight_decay,
        "batch_size": spec.batch_size,
        "seed": spec.seed,
        "final_loss": final_loss,
        "adapter": adapter.name,
    }
    return DecoderCheckpoint(
        model=model,
        tokenizer=tokenizer,
        config=cfg,
        mitigation_mode=spec.mitigation,
        train_meta=meta,
    )
