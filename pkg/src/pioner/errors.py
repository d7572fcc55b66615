"""Exception hierarchy shared across the package."""


class PionerError(Exception):
    """Base class for all package-specific errors."""


class SchemaError(PionerError):
    """A document is structurally malformed (missing field, unknown kind)."""


class ValidationError(PionerError):
    """A document is well-formed but carries invalid values."""


class ConfigError(PionerError):
    """Unknown configuration key or bad value type."""


class BackboneError(PionerError):
    """Encoder failure: model load, unsupported image, bad input."""


class CapabilityError(PionerError):
    """An adapter was asked for a capability it does not provide."""


class FormatError(PionerError):
    """A binary archive is corrupt: bad magic, truncated payload, header mismatch."""


class EmptySelectionError(PionerError):
    """A region selected no patches at all."""


class ModeError(PionerError):
    """Aggregation mode is incompatible with the selection or grid."""


class DegenerateWeightError(PionerError):
    """Aggregation weights carry zero total mass over the selection."""


class ZeroVectorError(PionerError):
    """An operation requiring a nonzero vector received a zero vector."""


class TrainError(PionerError):
    """Decoder training failed (bad spec, non-finite loss)."""


class DecodeError(PionerError):
    """Caption generation produced no usable output."""


class CheckpointError(PionerError):
    """Checkpoint archive unreadable or inconsistent with the serving setup."""


class DatasetError(PionerError):
    """Dataset file missing, unreadable, or empty."""


class PluginError(PionerError):
    """External scorer plugin failed or returned out-of-contract values."""


class LLMError(PionerError):
    """LLM endpoint unreachable or its output could not be parsed."""
