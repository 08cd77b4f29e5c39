"""Exception types shared across the engine.

Every failure mode raised by this package derives from EngineError so
callers (and the CLI) can catch one base class and still distinguish
kinds by type.
"""


class EngineError(Exception):
    """Base class for all errors raised by this package."""


class CorpusEmptyError(EngineError):
    """A corpus contained no usable tokens."""


class DegenerateVocabError(EngineError):
    """A vocabulary ended up with no regular tokens (specials only)."""


class InvalidIdError(EngineError):
    """A token id fell outside the vocabulary."""


class InvalidDistributionError(EngineError):
    """A probability vector failed normalization checks."""


class InvalidParameterError(EngineError):
    """An argument violated its documented range or shape."""


class EmptyDatasetError(EngineError):
    """A dataset-level operation received zero items."""


class InsufficientDataError(EngineError):
    """Too few data points for the requested estimate."""


class ZeroLengthError(EngineError):
    """A sequence-level operation received an empty sequence."""


class UndefinedCorrelationError(EngineError):
    """Correlation requested on a zero-variance input."""


class AlignmentError(EngineError):
    """Two parallel collections disagreed in length."""


class ProfileMismatchError(EngineError):
    """A calibration profile was applied to a different model."""


class ProviderIOError(EngineError):
    """A remote model provider was unreachable or timed out."""


class WireProtocolError(EngineError):
    """A remote peer sent a malformed or incompatible message."""


class ConfigError(EngineError):
    """An experiment config file or decoder spec was invalid."""


class FileFormatError(EngineError):
    """A model or profile file had an unrecognized layout."""
