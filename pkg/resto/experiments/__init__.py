"""Helpers to configure and run experiments with resto."""

from ._config import DEFAULTS, RunConfig, flatten

__all__ = ["RunConfig", "DEFAULTS", "flatten"]
