"""Analysis and synthesis adapters around the quantizers.

Magnitude spectrogram frames are mapped to :math:`D`-dimensional features by
a fixed linear projection, and mapped back by its transpose. Whatever the
projection cannot represent is carried next to the features together with
the phase, so that decoding unquantized features gives the input back.

"""
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .._constants import FEATURE_DIM, LOG_FLOOR
from ..dsp import ComplexSpectrogram, StftConfig, istft, stft
from ..exceptions import ConfigError, ShapeMismatchError
from ..utils import Waveform

__all__ = [
    "CodecAdapterConfig",
    "FeatureSidecar",
    "encode_features",
    "decode_features",
    "sidecar_arrays",
    "sidecar_from_arrays",
    "PROJECTIONS",
    "PHASE_SOURCES",
    "FEATURE_DOMAINS",
]

PROJECTIONS = ("orthonormal", "identity")
PHASE_SOURCES = ("from_input", "from_mixture")
FEATURE_DOMAINS = ("log_magnitude", "magnitude")


@dataclass(frozen=True)
class CodecAdapterConfig:

    """Feature adapter parameters.

    Attributes
    ----------
    stft : StftConfig
        Analysis of the codec input.
    dim : int
        Feature dimension :math:`D`.
    projection : str
        ``"identity"`` needs ``dim == stft.bins``; ``"orthonormal"`` draws a
        seeded random matrix with orthonormal columns (``dim <= bins``) or
        rows (``dim > bins``).
    phase_source : str
        Phase reattached at synthesis: the codec input's or the mixture's.
    feature_domain : str
        ``"log_magnitude"`` or ``"magnitude"``.
    seed : int
        Seed of the orthonormal projection.
    log_floor : float
        Magnitudes are floored here before the logarithm.
    feature_scale : float
        Multiplier applied after the projection.

    """

    stft: StftConfig = field(default_factory=StftConfig)
    dim: int = FEATURE_DIM
    projection: str = "orthonormal"
    phase_source: str = "from_input"
    feature_domain: str = "log_magnitude"
    seed: int = 0
    log_floor: float = LOG_FLOOR
    feature_scale: float = 1.0 / 16.0

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigError(f"dim must be positive, got {self.dim}.")
        if self.projection not in PROJECTIONS:
            raise ConfigError(
                f"Unknown projection {self.projection}, expected one of {PROJECTIONS}."
            )
        if self.phase_source not in PHASE_SOURCES:
            raise ConfigError(
                f"Unknown phase source {self.phase_source}, "
                f"expected one of {PHASE_SOURCES}."
            )
        if self.feature_domain not in FEATURE_DOMAINS:
            raise ConfigError(
                f"Unknown feature domain {self.feature_domain}, "
                f"expected one of {FEATURE_DOMAINS}."
            )
        if self.log_floor <= 0:
            raise ConfigError(f"log_floor must be positive, got {self.log_floor}.")
        if self.feature_scale <= 0:
            raise ConfigError(
                f"feature_scale must be positive, got {self.feature_scale}."
            )
        if self.projection == "identity" and self.dim != self.stft.bins:
            raise ConfigError(
                f"The identity projection needs dim == {self.stft.bins} bins, "
                f"got {self.dim}."
            )

    def projection_matrix(self):
        """Matrix :math:`P` of shape :math:`(bins, D)`, read-only."""
        return _projection(self.projection, self.stft.bins, self.dim, self.seed)


@lru_cache(maxsize=16)
def _projection(kind, bins, dim, seed):
    if kind == "identity":
        matrix = np.eye(bins)
    else:
        rng = np.random.default_rng(seed)
        rows, columns = max(bins, dim), min(bins, dim)
        q, r = np.linalg.qr(rng.standard_normal((rows, columns)))
        # sign convention of the QR factors
        q = q * np.sign(np.diag(r))
        matrix = q if dim <= bins else q.T

    matrix.setflags(write=False)
    return matrix


class FeatureSidecar(NamedTuple):

    """What decoding needs besides the features.

    Attributes
    ----------
    phase : ndarray
        Phase of shape :math:`(F, bins)` reattached at synthesis.
    complement : ndarray
        Part of the frame features outside the projection subspace, zero
        when the projection spans every bin.
    length : int
        Length of the analysed signal.
    sample_rate : int
        Sample rate of the analysed signal.

    """

    phase: np.ndarray
    complement: np.ndarray
    length: int
    sample_rate: int


def _frame_features(magnitude, cfg):
    if cfg.feature_domain == "log_magnitude":
        return np.log(np.maximum(magnitude, cfg.log_floor))
    return magnitude


def encode_features(x, cfg=None, phase_from=None):
    """Map a waveform or a magnitude matrix to a feature matrix.

    Parameters
    ----------
    x : Waveform or ndarray
        Codec input, either a signal or magnitudes of shape :math:`(F, bins)`
        such as fused magnitudes.
    cfg : CodecAdapterConfig, optional
        Adapter parameters.
    phase_from : ComplexSpectrogram, optional
        Spectrogram whose phase, length and sample rate go to the sidecar.
        Required for magnitude input; defaults to the input's own spectrogram
        for waveforms.

    Returns
    -------
    tuple
        Features of shape :math:`(F, D)` and a :class:`FeatureSidecar`.

    """
    if cfg is None:
        cfg = CodecAdapterConfig()

    if isinstance(x, Waveform):
        spectrogram = stft(x, cfg.stft)
        magnitude = spectrogram.magnitude()
        if phase_from is None:
            phase_from = spectrogram
    else:
        magnitude = np.asarray(x, dtype=np.float64)
        if phase_from is None:
            raise ValueError("Magnitude input needs a spectrogram to take phase from.")

    if magnitude.ndim != 2 or magnitude.shape[1] != cfg.stft.bins:
        raise ShapeMismatchError(
            f"Magnitudes of shape {magnitude.shape} do not have {cfg.stft.bins} bins."
        )
    if phase_from.shape != magnitude.shape:
        raise ShapeMismatchError(
            f"Phase of shape {phase_from.shape} does not match magnitudes "
            f"of shape {magnitude.shape}."
        )

    frames = _frame_features(magnitude, cfg)
    projection = cfg.projection_matrix()

    projected = frames @ projection
    complement = frames - projected @ projection.T
    features = cfg.feature_scale * projected

    sidecar = FeatureSidecar(
        phase=phase_from.phase(),
        complement=complement,
        length=phase_from.length,
        sample_rate=phase_from.sample_rate,
    )
    return features, sidecar


def decode_features(zq, sidecar, cfg=None):
    """Synthesize a waveform from (possibly quantized) features.

    The projection is inverted, the logarithm undone in the log domain
    (negative magnitudes are clipped in the linear one), the sidecar phase
    reattached and the spectrogram inverted.

    """
    if cfg is None:
        cfg = CodecAdapterConfig()

    zq = np.asarray(zq, dtype=np.float64)
    if zq.ndim != 2 or zq.shape[1] != cfg.dim:
        raise ShapeMismatchError(
            f"Features of shape {zq.shape} do not have {cfg.dim} columns."
        )
    if sidecar.phase.shape != (zq.shape[0], cfg.stft.bins):
        raise ShapeMismatchError(
            f"Sidecar phase of shape {sidecar.phase.shape} does not match "
            f"{zq.shape[0]} frames of {cfg.stft.bins} bins."
        )

    frames = (zq / cfg.feature_scale) @ cfg.projection_matrix().T + sidecar.complement

    if cfg.feature_domain == "log_magnitude":
        magnitude = np.exp(frames)
    else:
        magnitude = np.maximum(frames, 0.0)

    spectrogram = ComplexSpectrogram(
        magnitude * np.exp(1j * sidecar.phase),
        cfg.stft,
        sidecar.length,
        sidecar.sample_rate,
    )
    return istft(spectrogram)


def sidecar_arrays(sidecar):
    """Arrays of a sidecar, in the order :func:`sidecar_from_arrays` reads."""
    return [
        sidecar.phase,
        sidecar.complement,
        np.array([sidecar.length, sidecar.sample_rate], dtype=np.int64),
    ]


def sidecar_from_arrays(arrays):
    if len(arrays) != 3 or arrays[2].shape != (2,):
        raise ShapeMismatchError("A sidecar is made of phase, complement and sizes.")
    phase, complement, sizes = arrays
    if phase.shape != complement.shape:
        raise ShapeMismatchError("Sidecar phase and complement shapes differ.")
    return FeatureSidecar(phase, complement, int(sizes[0]), int(sizes[1]))


