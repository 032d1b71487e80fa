# noqa: D100

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve

from ..exceptions import ShapeMismatchError, SilentSignalError
from ..utils import Waveform, check_same_rate
from ._room import RIR

__all__ = ["MixtureRecord", "apply_rir", "mix_at_snr", "CLEAN_SNR"]

_logger = logging.getLogger(__name__)

CLEAN_SNR = math.inf


@dataclass(frozen=True)
class MixtureRecord:

    """Noisy-reverberant mixture and its components.

    Attributes
    ----------
    dry : Waveform
        Anechoic source signal.
    reverberant : Waveform
        Source convolved with `rir`.
    noise : Waveform
        Noise after gain, same length as `reverberant`.
    mixture : Waveform
        Sum of `reverberant` and `noise`.
    snr_db : float
        Requested SNR, ``inf`` for a clean mixture.
    rir : RIR
        Impulse response applied to the source.
    seed : int
        Seed of the noise segment draw.
    noise_gain : float
        Gain applied to the noise segment.

    """

    dry: Waveform
    reverberant: Waveform
    noise: Waveform
    mixture: Waveform
    snr_db: float
    rir: RIR
    seed: int
    noise_gain: float = 1.0

    def __post_init__(self):
        waveforms = (self.dry, self.reverberant, self.noise, self.mixture)
        check_same_rate(*waveforms)
        if len({len(w) for w in waveforms}) != 1:
            raise ShapeMismatchError("Mixture components must have equal lengths.")

    @property
    def sample_rate(self):
        return self.mixture.sample_rate


def apply_rir(s, h):
    """Convolve a signal with an impulse response.

    The full linear convolution is truncated to the length of `s`.

    Parameters
    ----------
    s : Waveform
        Source signal.
    h : RIR
        Impulse response with the same sample rate.

    Returns
    -------
    Waveform
        Reverberant signal.

    """
    check_same_rate(s, h)
    out = convolve(s.samples, h.taps, mode="full", method="auto")
    return s.with_samples(out[: len(s)])


def _noise_segment(noise, length, rng):
    samples = noise.samples

    if samples.size >= length:
        offset = int(rng.integers(0, samples.size - length + 1))
        return samples[offset : offset + length]

    # loop short noise from a random starting point
    offset = int(rng.integers(0, samples.size))
    return np.resize(np.roll(samples, -offset), length)


def mix_at_snr(x, n, snr_db, rng_seed, dry=None, rir=None):
    """Mix a reverberant signal with noise at a requested SNR.

    The noise is cropped at, or looped from, a seeded random offset to the
    length of `x` and scaled by
    :math:`g = \\sqrt{P_x / (P_n 10^{snr/10})}`.

    Parameters
    ----------
    x : Waveform
        Reverberant speech.
    n : Waveform
        Noise, any length.
    snr_db : float
        Target SNR in dB; ``inf`` gives a noiseless mixture.
    rng_seed : int
        Seed for the noise offset.
    dry : Waveform, optional
        Dry source kept in the record, by default `x`.
    rir : RIR, optional
        Impulse response kept in the record, by default a unit impulse.

    Returns
    -------
    MixtureRecord
        The mixture and its components.

    Raises
    ------
    SilentSignalError
        If `x` or the selected noise segment has zero power.

    """
    check_same_rate(x, n)
    if dry is None:
        dry = x
    if rir is None:
        rir = RIR([1.0], x.sample_rate, direct_path_index=0)

    rng = np.random.default_rng(rng_seed)
    segment = _noise_segment(n, len(x), rng)

    p_x = x.power()
    p_n = float(np.mean(np.square(segment)))
    if p_x <= 0:
        raise SilentSignalError("Cannot mix a silent signal at a given SNR.")

    if snr_db == CLEAN_SNR:
        gain = 0.0
        scaled = np.zeros_like(segment)
    else:
        if p_n <= 0:
            raise SilentSignalError("The selected noise segment is silent.")
        gain = math.sqrt(p_x / (p_n * 10.0 ** (snr_db / 10.0)))
        scaled = gain * segment

    _logger.debug("Mixing at %.2f dB SNR with noise gain %.6f.", snr_db, gain)

    return MixtureRecord(
        dry=dry,
        reverberant=x,
        noise=x.with_samples(scaled),
        mixture=x.with_samples(x.samples + scaled),
        snr_db=float(snr_db),
        rir=rir,
        seed=int(rng_seed),
        noise_gain=gain,
    )
