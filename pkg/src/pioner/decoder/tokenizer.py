"""Word-level tokenizer frozen into decoder checkpoints.

Vocabulary is built from the training corpus by whitespace splitting;
decode joins with single spaces, so generated token ids always decode to
the caption text they produced.
"""
from __future__ import annotations

from typing import Dict, List, Sequence

from ..errors import ValidationError

PAD, EOS, UNK = 0, 1, 2
_SPECIALS = ("<pad>", "<eos>", "<unk>")


class WordTokenizer:
    def __init__(self, words: Sequence[str]):
        for w in words:
            if not w or w.isspace():
                raise ValidationError("vocabulary words must be nonempty")
        self.words = tuple(words)
        self._index: Dict[str, int] = {
            w: i + len(_SPECIALS) for i, w in enumerate(self.words)
        }

    @classmethod
    def from_corpus(cls, corpus: Sequence[str]) -> "WordTokenizer":
        seen = sorted({tok for text in corpus for tok in text.split()})
        if not seen:
            raise ValidationError("corpus has no tokens")
        return cls(seen)

    @property
    def vocab_size(self) -> int:
        return len(self.words) + len(_SPECIALS)

    def encode(self, text: str) -> List[int]:
        return [self._index.get(tok, UNK) for tok in text.split()]

    def decode(self, ids: Sequence[int]) -> str:
        words = []
        for i in ids:
            if i < len(_SPECIALS):
                continue
            if i >= self.vocab_size:
                raise ValidationError(f"token id {i} outside vocabulary")
            words.append(self.words[i - len(_SPECIALS)])
        return " ".join(words)

    def state(self) -> dict:
        return {"words": list(self.words)}

    @classmethod
    def from_state(cls, state: dict) -> "WordTokenizer":
        return cls(state["words"])
