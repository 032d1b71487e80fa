"""STFT analysis and synthesis, complex ratio masks and magnitude fusion."""

from ._fusion import FusionConfig, fuse_features, load_fusion_weights
from ._mask import COMPRESSIONS, ComplexMask, apply_mask, compute_crm
from ._stft import WINDOWS, ComplexSpectrogram, StftConfig, istft, stft

__all__ = [
    "StftConfig",
    "ComplexSpectrogram",
    "WINDOWS",
    "stft",
    "istft",
    "ComplexMask",
    "COMPRESSIONS",
    "compute_crm",
    "apply_mask",
    "FusionConfig",
    "fuse_features",
    "load_fusion_weights",
]
