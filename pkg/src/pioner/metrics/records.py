"""Evaluation record: one candidate caption against its references."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

from ..errors import ValidationError


@dataclass(frozen=True)
class EvalRecord:
    id: str
    candidate: str
    references: Tuple[str, ...]

    def __post_init__(self):
        if not self.references:
            raise ValidationError(f"record {self.id!r} has no references")
        object.__setattr__(self, "references", tuple(self.references))
