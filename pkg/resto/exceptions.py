"""Exceptions raised by resto."""

__all__ = [
    "RestoError",
    "ConfigError",
    "ShapeMismatchError",
    "GeometryError",
    "InfeasibleRoomError",
    "InsufficientDecayError",
    "SilentSignalError",
    "SampleRateMismatchError",
    "FormatError",
    "UnsupportedVersionError",
    "ChecksumError",
]


class RestoError(Exception):
    """Base class of every resto error."""


class ConfigError(RestoError, ValueError):
    """Invalid configuration, raised before any work is done."""


class ShapeMismatchError(RestoError, ValueError):
    pass


class GeometryError(RestoError, ValueError):
    """Source or microphone outside the room, or coincident."""


class InfeasibleRoomError(RestoError, ValueError):
    """The requested RT60 needs a wall absorption above 1."""


class InsufficientDecayError(RestoError, ValueError):
    pass


class SilentSignalError(RestoError, ValueError):
    pass


class SampleRateMismatchError(RestoError, ValueError):
    pass


class FormatError(RestoError, ValueError):
    """A binary or text file does not follow its documented layout."""


class UnsupportedVersionError(FormatError):
    pass


class ChecksumError(FormatError):
    pass
