# noqa: D100

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .._container import load_arrays, save_arrays
from ..dsp import COMPRESSIONS, ComplexMask, apply_mask, compute_crm, istft, stft
from ..exceptions import ConfigError, FormatError
from ..utils import check_same_rate

__all__ = ["MaskSource", "MASK_KINDS", "run_dn", "save_mask", "load_mask"]

_logger = logging.getLogger(__name__)

MASK_KINDS = ("oracle", "file", "passthrough")


@dataclass(frozen=True)
class MaskSource:

    """Where the denoising stage gets its complex mask from.

    Attributes
    ----------
    kind : str
        ``"oracle"`` computes the ideal mask from the reference, ``"file"``
        uses a precomputed `mask` and ``"passthrough"`` a mask of ones.
    mask : ComplexMask, optional
        Precomputed mask of the ``"file"`` kind.
    bound : float, optional
        Magnitude bound of oracle masks, unbounded by default.
    compression : str
        How oracle masks are bounded, ``"clip"`` or ``"tanh"``.

    """

    kind: str = "passthrough"
    mask: Optional[ComplexMask] = None
    bound: Optional[float] = None
    compression: str = "clip"

    def __post_init__(self):
        if self.kind not in MASK_KINDS:
            raise ConfigError(f"Unknown mask kind {self.kind}, expected one of {MASK_KINDS}.")
        if self.compression not in COMPRESSIONS:
            raise ConfigError(
                f"Unknown compression {self.compression}, "
                f"expected one of {COMPRESSIONS}."
            )
        if self.bound is not None and self.bound <= 0:
            raise ConfigError(f"Mask bound must be positive, got {self.bound}.")
        if self.kind == "file" and self.mask is None:
            raise ConfigError("A file mask source needs a mask.")

    @classmethod
    def oracle(cls, bound=None, compression="clip"):
        return cls("oracle", bound=bound, compression=compression)

    @classmethod
    def passthrough(cls):
        return cls("passthrough")

    @classmethod
    def from_file(cls, path):
        return cls("file", mask=load_mask(path))


def save_mask(path, mask):
    save_arrays(path, "mask", [mask.data])


def load_mask(path):
    """Read a mask blob written by :func:`save_mask`."""
    _, arrays = load_arrays(path, kind="mask")
    if len(arrays) != 1 or arrays[0].dtype != np.complex128:
        raise FormatError(f"{path} does not hold a single complex mask.")
    return ComplexMask(arrays[0])


def run_dn(y, src, x=None, stft_cfg=None):
    """Denoise a mixture by complex masking.

    Parameters
    ----------
    y : Waveform
        Mixture.
    src : MaskSource
        Mask provider.
    x : Waveform, optional
        Denoising target, required by the oracle source.
    stft_cfg : StftConfig, optional
        Analysis parameters.

    Returns
    -------
    Waveform
        :math:`istft(M \\odot stft(y))`, of the length of `y`.

    Raises
    ------
    ValueError
        If the oracle source has no reference.
    ShapeMismatchError
        If a file mask does not match the mixture spectrogram.

    """
    Y = stft(y, stft_cfg)

    if src.kind == "oracle":
        if x is None:
            raise ValueError("The oracle mask needs the reference signal.")
        check_same_rate(y, x)
        mask = compute_crm(Y, stft(x, stft_cfg), src.bound, src.compression)
    elif src.kind == "file":
        mask = src.mask
    else:
        mask = ComplexMask.ones(Y.shape)

    _logger.debug("Applying a %s mask to %d frames.", src.kind, Y.frames)

    return istft(apply_mask(Y, mask))
