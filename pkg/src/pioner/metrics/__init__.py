from .bleu import bleu4
from .cider import cider_d
from .densemap import DENSE_MAP_THRESHOLDS, dense_map
from .plugins import CallableScorer, ScorerPlugin, SubprocessScorer
from .records import EvalRecord
from .rouge import rouge_l, rouge_l_record, rouge_l_scores
from .tokenization import tokenize

__all__ = [
    "EvalRecord",
    "cider_d",
    "bleu4",
    "rouge_l",
    "rouge_l_record",
    "rouge_l_scores",
    "dense_map",
    "DENSE_MAP_THRESHOLDS",
    "ScorerPlugin",
    "CallableScorer",
    "SubprocessScorer",
    "tokenize",
]
