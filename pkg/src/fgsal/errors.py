"""Exception types raised by the saliency pipeline."""


class FgsalError(Exception):
    """Base class for all pipeline errors."""


class ImageReadError(FgsalError, OSError):
    """The image file is missing or unreadable."""


class ImageFormatError(FgsalError, ValueError):
    """The file could not be decoded, or the decoded image is too small."""


class ParamError(FgsalError, ValueError):
    pass


class DimensionMismatch(FgsalError, ValueError):
    pass


class BoundsError(FgsalError, ValueError):
    pass


class DegenerateForeground(FgsalError):
    """Thresholding put every region on the same side."""


class DegenerateMask(FgsalError):
    """A foreground mask lacks either foreground or background regions."""


class EmptyGroundTruth(FgsalError, ValueError):
    pass


class SingularSystemWarning(RuntimeWarning):
    """All unary weights vanished; the saliency system has no unique solution."""
