"""CIDEr-D: consensus-based caption scoring over TF-IDF n-gram vectors.

For each order n in 1..4 the candidate and each reference become sparse
TF-IDF vectors (term frequency times log(N) - log(document frequency),
document frequency counted over the records' reference sets). Candidate
counts are clipped to the reference's before the cosine, a Gaussian
length penalty (sigma = 6) damps length mismatch, orders are averaged,
and the result is scaled by 10.
"""
from __future__ import annotations

import math
from collections import Counter, defaultdict
from typing import Dict, List, Sequence, Tuple

from ..errors import ValidationError
from .records import EvalRecord
from .tokenization import ngrams, tokenize

N_ORDERS = 4
SIGMA = 6.0


def _count_ngrams(text: str) -> Counter:
    tokens = tokenize(text)
    counts: Counter = Counter()
    for n in range(1, N_ORDERS + 1):
        counts.update(ngrams(tokens, n))
    return counts


def _vectorize(counts: Counter, doc_freq: Dict, log_n: float):
    vec = [defaultdict(float) for _ in range(N_ORDERS)]
    norm = [0.0] * N_ORDERS
    length = 0
    for gram, freq in counts.items():
        idf = log_n - math.log(max(1.0, doc_freq[gram]))
        k = len(gram) - 1
        vec[k][gram] = freq * idf
        norm[k] += vec[k][gram] ** 2
        if k == 0:
            length += freq
    return vec, [math.sqrt(x) for x in norm], length


def _similarity(vec_c, vec_r, norm_c, norm_r, len_c, len_r) -> float:
    delta = float(len_c - len_r)
    penalty = math.exp(-(delta**2) / (2 * SIGMA**2))
    total = 0.0
    for k in range(N_ORDERS):
        dot = 0.0
        for gram, wc in vec_c[k].items():
            dot += min(wc, vec_r[k][gram]) * vec_r[k][gram]
        if norm_c[k] != 0 and norm_r[k] != 0:
            dot /= norm_c[k] * norm_r[k]
        else:
            dot = 0.0
        total += dot * penalty
    return total / N_ORDERS


def cider_d(records: Sequence[EvalRecord]) -> Tuple[float, List[float]]:
    """Corpus CIDEr-D and per-record scores (x10 scale)."""
    if not records:
        raise ValidationError("cider_d needs at least one record")
    ref_counts = [[_count_ngrams(r) for r in rec.references] for rec in records]
    doc_freq: Counter = Counter()
    for refs in ref_counts:
        seen = set()
        for counts in refs:
            seen.update(counts.keys())
        doc_freq.update(seen)
    log_n = math.log(float(len(records)))

    scores: List[float] = []
    for rec, refs in zip(records, ref_counts):
        cand = _vectorize(_count_ngrams(rec.candidate), doc_freq, log_n)
        sims = [
            _similarity(cand[0], rv, cand[1], rn, cand[2], rl)
            for rv, rn, rl in (_vectorize(c, doc_freq, log_n) for c in refs)
        ]
        scores.append(10.0 * sum(sims) / len(sims))
    return sum(scores) / len(scores), scores
