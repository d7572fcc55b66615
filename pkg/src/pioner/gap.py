"""Modality-gap mitigation: text-memory projection and noise injection.

The projection maps a visual embedding into the text subspace as a
temperature-softmax-weighted combination of memory columns; noise
injection perturbs text embeddings during decoder training so the decoder
tolerates visual-side inputs at inference. The passthrough baseline
applies no mitigation at all.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .errors import FormatError, ValidationError, ZeroVectorError

MEM_MAGIC = b"PIONMEM1"
_MEM_HEADER = struct.Struct("<IId")  # dim, count, tau

UNIT_NORM_TOL = 1e-6


@dataclass(frozen=True)
class MemoryBank:
    """Text embeddings as columns of a (dim, n) matrix, unit-norm each.

    ``tau`` is the softmax temperature of the projection. Immutable after
    build; safe to share across threads.
    """

    entries: Tuple[str, ...]
    matrix: np.ndarray  # (dim, n) float32, columns L2-normalized
    tau: float

    def __post_init__(self):
        if len(self.entries) < 1:
            raise ValidationError("memory bank needs at least one entry")
        m = np.asarray(self.matrix, dtype=np.float32)
        if m.ndim != 2 or m.shape[1] != len(self.entries):
            raise ValidationError("matrix must be (dim, n_entries)")
        norms = np.linalg.norm(m.astype(np.float64), axis=0)
        if np.abs(norms - 1.0).max() > UNIT_NORM_TOL:
            raise ValidationError("memory columns must be unit-norm")
        if not self.tau > 0:
            raise ValidationError("tau must be positive")
        m = np.ascontiguousarray(m)
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "entries", tuple(self.entries))

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    def __len__(self) -> int:
        return int(self.matrix.shape[1])


def build_memory(
    corpus: Sequence[str],
    adapter,
    tau: float = 0.01,
    out_path: Optional[Union[str, Path]] = None,
) -> MemoryBank:
    """Embed and L2-normalize a text corpus into a memory bank.

    Columns keep corpus order; duplicates are kept as identical columns.
    When ``out_path`` is given the bank is persisted as a PIONMEM1 archive
    (byte-identical across rebuilds from the same corpus and adapter).
    """
    if not corpus:
        raise ValidationError("memory corpus must be nonempty")
    columns = []
    for text in corpus:
        e = np.asarray(adapter.encode_text(text), dtype=np.float64)
        norm = np.linalg.norm(e)
        if norm == 0:
            raise ZeroVectorError(f"text embeds to the zero vector: {text!r}")
        columns.append((e / norm).astype(np.float32))
    bank = MemoryBank(entries=tuple(corpus), matrix=np.stack(columns, axis=1), tau=tau)
    if out_path is not None:
        save_memory(bank, out_path)
    return bank


def save_memory(bank: MemoryBank, path: Union[str, Path]) -> None:
    with open(path, "wb") as f:
        f.write(MEM_MAGIC)
        f.write(_MEM_HEADER.pack(bank.dim, len(bank), bank.tau))
        for text in bank.entries:
            raw = text.encode("utf-8")
            f.write(struct.pack("<I", len(raw)))
            f.write(raw)
        # n columns stored consecutively in corpus order
        f.write(np.ascontiguousarray(bank.matrix.T, dtype="<f4").tobytes())


def load_memory(path: Union[str, Path]) -> MemoryBank:
    with open(path, "rb") as f:
        blob = f.read()
    if len(blob) < len(MEM_MAGIC) + _MEM_HEADER.size:
        raise FormatError("memory archive truncated before header")
    if blob[: len(MEM_MAGIC)] != MEM_MAGIC:
        raise FormatError("bad memory archive magic")
    dim, count, tau = _MEM_HEADER.unpack_from(blob, len(MEM_MAGIC))
    offset = len(MEM_MAGIC) + _MEM_HEADER.size
    entries = []
    for _ in range(count):
        if len(blob) < offset + 4:
            raise FormatError("memory archive truncated inside strings")
        (n,) = struct.unpack_from("<I", blob, offset)
        offset += 4
        if len(blob) < offset + n:
            raise FormatError("memory archive truncated inside strings")
        entries.append(blob[offset : offset + n].decode("utf-8"))
        offset += n
    expected = offset + dim * count * 4
    if len(blob) != expected:
        raise FormatError(
            f"memory archive length {len(blob)} does not match header ({expected} expected)"
        )
    matrix = np.frombuffer(blob, dtype="<f4", count=dim * count, offset=offset)
    matrix = matrix.reshape(count, dim).T
    try:
        return MemoryBank(entries=tuple(entries), matrix=matrix, tau=tau)
    except ValidationError as e:
        raise FormatError(f"memory archive holds an invalid bank: {e}") from e


def project(v: np.ndarray, bank: MemoryBank) -> np.ndarray:
    """Project a visual embedding into the text subspace.

    The input is L2-normalized, softmax weights over cosine similarities
    (scaled by 1/tau, computed with max-subtraction so tau = 0.01 stays
    finite) mix the memory columns. The output is a convex combination of
    the columns and is invariant to positive rescaling of ``v``.
    """
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if v.shape[0] != bank.dim:
        raise ValidationError(f"query dim {v.shape[0]} != bank dim {bank.dim}")
    if not np.isfinite(v).all():
        raise ValidationError("query vector has non-finite entries")
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ZeroVectorError("cannot project the zero vector")
    m = bank.matrix.astype(np.float64)
    logits = (m.T @ (v / norm)) / bank.tau
    logits -= logits.max()
    alpha = np.exp(logits)
    alpha /= alpha.sum()
    return m @ alpha


def passthrough(v: np.ndarray) -> np.ndarray:
    """No-mitigation baseline: the identity."""
    return v


@dataclass(frozen=True)
class NoiseConfig:
    variance: float = 0.08
    seed: int = 0

    def __post_init__(self):
        if self.variance < 0:
            raise ValidationError("noise variance must be nonnegative")


class NoiseInjector:
    """Owns one seeded Gaussian stream; use one injector per training worker."""

    def __init__(self, cfg: NoiseConfig):
        self.cfg = cfg
        self._rng = np.random.default_rng(cfg.seed)

    def perturb(self, e: np.ndarray) -> np.ndarray:
        e = np.asarray(e, dtype=np.float64)
        if self.cfg.variance == 0:
            return e
        noise = self._rng.normal(0.0, np.sqrt(self.cfg.variance), size=e.shape)
        return e + noise


def perturb(e: np.ndarray, cfg: NoiseConfig) -> np.ndarray:
    """One-shot perturbation drawing the first sample of ``cfg``'s stream."""
    return NoiseInjector(cfg).perturb(e)
