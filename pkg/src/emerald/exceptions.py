"""Exception types raised across the grading pipeline."""


class EmeraldError(Exception):
    """Base class for every error raised by this package."""


class DegenerateImage(EmeraldError, ValueError):
    """The image holds a single gray level, so no threshold separates it."""


class EmptyRoi(EmeraldError, ValueError):
    """A mask selected no pixels."""


class DimensionMismatch(EmeraldError, ValueError):
    pass


class BinCountMismatch(EmeraldError, ValueError):
    pass


class NotNormalized(EmeraldError, ValueError):
    pass


class InvalidOffset(EmeraldError, ValueError):
    pass


class EmptyMatrix(EmeraldError, ValueError):
    pass


class MissingCategory(EmeraldError, ValueError):
    pass


class DuplicateCategory(EmeraldError, ValueError):
    pass


class InsufficientData(EmeraldError, ValueError):
    pass


class TooFewInstances(InsufficientData):
    pass


class ParseError(EmeraldError, ValueError):
    pass


class ValidationError(EmeraldError, ValueError):
    pass


class ModelFormatError(EmeraldError, ValueError):
    """A persisted model document cannot be read by this version."""


class NoConvergence(UserWarning):
    """Affinity propagation hit its iteration cap before the exemplars settled.

    Issued as a warning; the last assignment is still returned.
    """


class ProvenanceMismatch(UserWarning):
    """A model is applied to features extracted under different settings."""
