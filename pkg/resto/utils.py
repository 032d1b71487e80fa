"""Helper functions.

Waveform container and WAV input/output shared by the other modules.

"""
import os
import tempfile
from contextlib import contextmanager

import numpy as np
from scipy.io import wavfile

from .exceptions import FormatError, SampleRateMismatchError

__all__ = ["Waveform", "read_wav", "write_wav", "atomic_write", "check_same_rate"]

_PCM16_SCALE = 32768.0


class Waveform:

    """A mono signal and its sample rate.

    Samples are stored as a read-only float64 array, so a waveform can be
    shared between threads.

    Attributes
    ----------
    samples : ndarray
        Signal samples with shape :math:`(T,)`.
    sample_rate : int
        Sampling frequency in Hz.

    """

    __slots__ = ("_samples", "_sample_rate")

    def __init__(self, samples, sample_rate):
        samples = np.array(samples, dtype=np.float64)

        if samples.ndim != 1:
            raise ValueError(f"A waveform must be 1-D, got shape {samples.shape}.")
        if samples.size < 1:
            raise ValueError("A waveform must have at least one sample.")
        if not np.all(np.isfinite(samples)):
            raise ValueError("Waveform samples must be finite.")
        if int(sample_rate) != sample_rate or sample_rate <= 0:
            raise ValueError(f"Invalid sample rate {sample_rate}.")

        samples.setflags(write=False)
        self._samples = samples
        self._sample_rate = int(sample_rate)

    @property
    def samples(self):
        return self._samples

    @property
    def sample_rate(self):
        return self._sample_rate

    @property
    def duration(self):
        return self._samples.size / self._sample_rate

    def power(self):
        """Mean squared amplitude."""
        return float(np.mean(np.square(self._samples)))

    def with_samples(self, samples):
        """Return a waveform with new samples and the same sample rate."""
        return Waveform(samples, self._sample_rate)

    def __len__(self):
        return self._samples.size

    def __repr__(self):
        return f"Waveform(length={len(self)}, sample_rate={self._sample_rate})"


def check_same_rate(*waveforms):
    rates = {w.sample_rate for w in waveforms}
    if len(rates) > 1:
        raise SampleRateMismatchError(f"Sample rates differ: {sorted(rates)}.")


@contextmanager
def atomic_write(path, mode="wb"):
    """Open a temporary file next to `path` and move it in place on success."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, mode) as f:
            yield f
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


def read_wav(path):
    """Read a mono WAV file.

    Parameters
    ----------
    path : str
        A 16-bit PCM or 32-bit float WAV file.

    Returns
    -------
    Waveform
        Samples scaled to the nominal range :math:`[-1, 1]`.

    """
    sample_rate, data = wavfile.read(path)

    if data.ndim > 1:
        if data.shape[1] != 1:
            raise FormatError(
                f"{path} has {data.shape[1]} channels, only mono is supported."
            )
        data = data[:, 0]

    if data.dtype == np.int16:
        samples = data.astype(np.float64) / _PCM16_SCALE
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
    else:
        raise FormatError(
            f"{path} has samples of type {data.dtype}, "
            "expected 16-bit PCM or 32-bit float."
        )

    return Waveform(samples, sample_rate)


def write_wav(path, waveform, sample_format="float32"):
    """Write a waveform as a mono WAV file.

    Parameters
    ----------
    path : str
        Output file. It is replaced atomically.
    waveform : Waveform
        Signal to save.
    sample_format : str, optional
        Either "float32" or "pcm16", by default "float32".

    """
    samples = waveform.samples

    if sample_format == "float32":
        data = samples.astype(np.float32)
    elif sample_format == "pcm16":
        data = np.clip(np.round(samples * _PCM16_SCALE), -32768, 32767).astype(
            np.int16
        )
    else:
        raise ValueError(f"Unknown sample format {sample_format}.")

    with atomic_write(path) as f:
        wavfile.write(f, waveform.sample_rate, data)
