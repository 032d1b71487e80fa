# noqa: D100

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import check_COLA, get_window

from .._constants import DIVISION_EPSILON
from ..exceptions import ConfigError, ShapeMismatchError
from ..utils import Waveform

__all__ = ["StftConfig", "ComplexSpectrogram", "stft", "istft", "WINDOWS"]

WINDOWS = ("hann", "sqrt_hann")


@dataclass(frozen=True)
class StftConfig:

    """Short-time Fourier transform parameters.

    Attributes
    ----------
    fft_size : int
        Frame length and FFT size, a power of two.
    hop : int
        Frame shift in samples.
    window : str
        ``"hann"`` analyses with a Hann window and synthesizes with a
        rectangular one; ``"sqrt_hann"`` uses a square-root Hann window on
        both sides.
    center_padding : bool
        Pad ``fft_size // 2`` zeros before the signal so the first frame is
        centered on sample 0.

    """

    fft_size: int = 512
    hop: int = 128
    window: str = "sqrt_hann"
    center_padding: bool = True

    def __post_init__(self):
        n = self.fft_size
        if n < 2 or n & (n - 1):
            raise ConfigError(f"fft_size must be a power of two, got {n}.")
        if not 0 < self.hop <= n:
            raise ConfigError(f"hop must be in [1, {n}], got {self.hop}.")
        if self.window not in WINDOWS:
            raise ConfigError(f"Unknown window {self.window}, expected one of {WINDOWS}.")

        product = self.analysis_window() * self.synthesis_window()
        if not check_COLA(product, n, n - self.hop):
            raise ConfigError(
                f"The {self.window} window is not constant-overlap-add "
                f"with fft_size {n} and hop {self.hop}."
            )

    @property
    def bins(self):
        return self.fft_size // 2 + 1

    @property
    def padding(self):
        return self.fft_size // 2 if self.center_padding else 0

    def analysis_window(self):
        hann = get_window("hann", self.fft_size)
        return np.sqrt(hann) if self.window == "sqrt_hann" else hann

    def synthesis_window(self):
        if self.window == "sqrt_hann":
            return np.sqrt(get_window("hann", self.fft_size))
        return np.ones(self.fft_size)

    def frame_count(self, length):
        padded = length + 2 * self.padding
        return 1 + max(0, math.ceil((padded - self.fft_size) / self.hop))


class ComplexSpectrogram:

    """One-sided complex spectrogram.

    Attributes
    ----------
    data : ndarray
        Complex matrix of shape :math:`(F, N/2 + 1)`.
    config : StftConfig
        Parameters the spectrogram was computed with.
    length : int
        Number of samples of the analysed signal.
    sample_rate : int
        Sample rate of the analysed signal.

    """

    __slots__ = ("data", "config", "length", "sample_rate")

    def __init__(self, data, config, length, sample_rate):
        data = np.array(data, dtype=np.complex128)
        if data.ndim != 2 or data.shape[1] != config.bins:
            raise ShapeMismatchError(
                f"Spectrogram of shape {data.shape} does not match "
                f"{config.bins} bins."
            )
        if not np.all(np.isfinite(data)):
            raise ValueError("Spectrogram entries must be finite.")

        data.setflags(write=False)
        self.data = data
        self.config = config
        self.length = int(length)
        self.sample_rate = int(sample_rate)

    @property
    def frames(self):
        return self.data.shape[0]

    @property
    def bins(self):
        return self.data.shape[1]

    @property
    def shape(self):
        return self.data.shape

    def magnitude(self):
        return np.abs(self.data)

    def phase(self):
        return np.angle(self.data)

    def with_data(self, data):
        return ComplexSpectrogram(data, self.config, self.length, self.sample_rate)


def _frame_indices(frames, config):
    return np.arange(frames)[:, None] * config.hop + np.arange(config.fft_size)


def stft(x, cfg=None):
    """Compute the one-sided STFT of a waveform.

    Parameters
    ----------
    x : Waveform
        Signal to analyse.
    cfg : StftConfig, optional
        By default fft size 512, hop 128 and square-root Hann windows.

    Returns
    -------
    ComplexSpectrogram
        Spectrogram with :math:`1 + \\lceil (L_p - N) / H \\rceil` frames,
        :math:`L_p` being the padded length. The tail is zero-padded to a
        whole frame.

    """
    if cfg is None:
        cfg = StftConfig()

    samples = x.samples
    if not cfg.center_padding and samples.size < cfg.fft_size:
        raise ValueError(
            f"Signal of {samples.size} samples is shorter than fft_size "
            f"{cfg.fft_size} and center padding is off."
        )

    frames = cfg.frame_count(samples.size)
    padded = np.zeros((frames - 1) * cfg.hop + cfg.fft_size)
    padded[cfg.padding : cfg.padding + samples.size] = samples

    segments = padded[_frame_indices(frames, cfg)] * cfg.analysis_window()
    data = np.fft.rfft(segments, axis=1)

    return ComplexSpectrogram(data, cfg, samples.size, x.sample_rate)


def istft(S):
    """Invert :func:`stft` by weighted overlap-add.

    Frames are synthesized with the synthesis window, overlap-added and
    divided by the overlap-added product of both windows wherever it
    exceeds a small epsilon. The result is trimmed to ``S.length``.

    """
    cfg = S.config
    if S.bins != cfg.bins:
        raise ShapeMismatchError(
            f"Spectrogram has {S.bins} bins, its config needs {cfg.bins}."
        )
    if S.frames != cfg.frame_count(S.length):
        raise ShapeMismatchError(
            f"Spectrogram has {S.frames} frames, a signal of {S.length} samples "
            f"needs {cfg.frame_count(S.length)}."
        )

    segments = np.fft.irfft(S.data, n=cfg.fft_size, axis=1) * cfg.synthesis_window()
    indices = _frame_indices(S.frames, cfg)

    out = np.zeros((S.frames - 1) * cfg.hop + cfg.fft_size)
    norm = np.zeros_like(out)
    np.add.at(out, indices, segments)
    np.add.at(
        norm,
        indices,
        np.broadcast_to(
            cfg.analysis_window() * cfg.synthesis_window(), segments.shape
        ),
    )

    covered = norm > DIVISION_EPSILON
    out = np.divide(out, norm, out=np.zeros_like(out), where=covered)

    return Waveform(out[cfg.padding : cfg.padding + S.length], S.sample_rate)
