"""Dense-captioning mAP over caption-similarity thresholds.

With ground-truth boxes as input the localization IoU is exact, so
average precision at a similarity threshold reduces to the fraction of
boxes whose caption similarity clears it; mAP averages over thresholds.
"""
from __future__ import annotations

import logging
from typing import List, Sequence, Tuple, Union

from ..errors import PluginError, ValidationError
from .plugins import ScorerPlugin
from .records import EvalRecord
from .rouge import rouge_l_scores

log = logging.getLogger(__name__)

DENSE_MAP_THRESHOLDS = (0.0, 0.05, 0.10, 0.15, 0.20, 0.25)


def dense_map(
    records: Sequence[EvalRecord],
    similarity: Union[ScorerPlugin, str, None] = None,
    thresholds: Sequence[float] = DENSE_MAP_THRESHOLDS,
) -> float:
    """mAP over similarity thresholds; one record per ground-truth box.

    ``similarity`` is a scorer plugin (METEOR when configured) or the
    string "rouge-l" / None for the native fallback, which is announced
    loudly since published numbers use METEOR.
    """
    if not records:
        raise ValidationError("dense_map needs at least one record")
    if similarity is None or similarity == "rouge-l":
        log.warning(
            "dense_map: no similarity plugin configured; falling back to native "
            "ROUGE-L (published dense-captioning numbers use METEOR)"
        )
        _, scores = rouge_l_scores(records)
    else:
        try:
            _, scores = similarity.score(records)
        except PluginError:
            raise
        except Exception as e:
            name = getattr(similarity, "name", repr(similarity))
            raise PluginError(f"similarity plugin {name!r} failed: {e}") from e
    return sum(_ap(scores, th) for th in thresholds) / len(thresholds)


def _ap(scores: List[float], threshold: float) -> float:
    return sum(1 for s in scores if s >= threshold) / len(scores)
