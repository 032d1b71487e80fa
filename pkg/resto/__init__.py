"""API reference documentation for resto package."""

__all__ = ["__version__"]

from ._version import __version__
