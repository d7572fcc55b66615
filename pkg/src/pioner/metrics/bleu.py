"""Corpus BLEU@4: clipped modified precision, geometric mean, brevity penalty."""
from __future__ import annotations

import math
from collections import Counter
from typing import Sequence

from ..errors import ValidationError
from .records import EvalRecord
from .tokenization import ngrams, tokenize

N_ORDERS = 4


def bleu4(records: Sequence[EvalRecord]) -> float:
    """Standard corpus BLEU@4 (no smoothing; any zero precision gives 0)."""
    if not records:
        raise ValidationError("bleu4 needs at least one record")
    matched = [0] * N_ORDERS
    total = [0] * N_ORDERS
    cand_len = 0
    ref_len = 0
    for rec in records:
        cand = tokenize(rec.candidate)
        refs = [tokenize(r) for r in rec.references]
        cand_len += len(cand)
        ref_len += _closest_length(len(cand), refs)
        for n in range(1, N_ORDERS + 1):
            counts = Counter(ngrams(cand, n))
            if not counts:
                continue
            clip: Counter = Counter()
            for ref in refs:
                for gram, c in Counter(ngrams(ref, n)).items():
                    clip[gram] = max(clip[gram], c)
            total[n - 1] += sum(counts.values())
            matched[n - 1] += sum(min(c, clip[gram]) for gram, c in counts.items())
    if cand_len == 0 or any(t == 0 for t in total) or any(m == 0 for m in matched):
        return 0.0
    log_precision = sum(math.log(m / t) for m, t in zip(matched, total)) / N_ORDERS
    brevity = 1.0 if cand_len > ref_len else math.exp(1.0 - ref_len / cand_len)
    return brevity * math.exp(log_precision)


def _closest_length(cand_len: int, refs) -> int:
    # closest reference length; ties go to the shorter reference
    lengths = sorted(len(r) for r in refs)
    return min(lengths, key=lambda L: (abs(L - cand_len), L))
