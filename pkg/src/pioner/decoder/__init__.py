from .checkpoint import DecoderCheckpoint, load_checkpoint, save_checkpoint
from .generation import generate
from .model import DecoderConfig, PrefixDecoder
from .pipeline import CaptionPipeline
from .tokenizer import WordTokenizer
from .training import TrainSpec, prefix_gradient, sequence_loss, train

__all__ = [
    "DecoderCheckpoint",
    "DecoderConfig",
    "PrefixDecoder",
    "WordTokenizer",
    "TrainSpec",
    "train",
    "generate",
    "sequence_loss",
    "prefix_gradient",
    "CaptionPipeline",
    "save_checkpoint",
    "load_checkpoint",
]
