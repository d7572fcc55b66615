"""Single tokenization shared by every native caption metric."""
from __future__ import annotations

import re
from typing import List, Tuple

_PUNCT = re.compile(r"[^\w\s]")


def tokenize(text: str) -> List[str]:
    """Lowercase, strip punctuation to spaces, split on whitespace."""
    return _PUNCT.sub(" ", text.lower()).split()


def ngrams(tokens: List[str], n: int) -> List[Tuple[str, ...]]:
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]
