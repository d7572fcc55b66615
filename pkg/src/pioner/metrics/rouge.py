"""ROUGE-L: longest-common-subsequence F-measure (beta^2 = 1.2)."""
from __future__ import annotations

from typing import List, Sequence, Tuple

from ..errors import ValidationError
from .records import EvalRecord
from .tokenization import tokenize

BETA_SQ = 1.2


def _lcs_length(a: List[str], b: List[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            cur[j] = prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def rouge_l_record(candidate: str, references: Sequence[str]) -> float:
    """Best-precision/best-recall LCS F-measure over the references."""
    cand = tokenize(candidate)
    best_p = 0.0
    best_r = 0.0
    for ref_text in references:
        ref = tokenize(ref_text)
        lcs = _lcs_length(cand, ref)
        if cand:
            best_p = max(best_p, lcs / len(cand))
        if ref:
            best_r = max(best_r, lcs / len(ref))
    if best_p == 0.0 or best_r == 0.0:
        return 0.0
    return ((1 + BETA_SQ) * best_p * best_r) / (best_r + BETA_SQ * best_p)


def rouge_l(records: Sequence[EvalRecord]) -> float:
    """Corpus ROUGE-L: mean of per-record scores."""
    corpus, _ = rouge_l_scores(records)
    return corpus


def rouge_l_scores(records: Sequence[EvalRecord]) -> Tuple[float, List[float]]:
    if not records:
        raise ValidationError("rouge_l needs at least one record")
    scores = [rouge_l_record(r.candidate, r.references) for r in records]
    return sum(scores) / len(scores), scores
