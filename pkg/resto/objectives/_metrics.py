# noqa: D100

import numpy as np

from .._constants import DEFAULT_SAMPLE_RATE, LOG_FLOOR, SI_SDR_CAP
from ..dsp import StftConfig, stft
from ..exceptions import ShapeMismatchError, SilentSignalError
from ..utils import Waveform

__all__ = [
    "si_sdr",
    "spectral_convergence",
    "log_magnitude_l1",
    "log_spectral_distance",
]

# additive term of the SI-SDR denominator
_SDR_EPSILON = 1e-12
_LSD_FLOOR = 1e-10


def _samples(x):
    return x.samples if isinstance(x, Waveform) else np.asarray(x, dtype=np.float64)


def _as_waveform(x):
    if isinstance(x, Waveform):
        return x
    return Waveform(x, DEFAULT_SAMPLE_RATE)


def _check_lengths(a, b):
    if a.shape != b.shape:
        raise ShapeMismatchError(f"Signals of shape {a.shape} and {b.shape} differ.")


def si_sdr(est, ref):
    """Scale-invariant signal-to-distortion ratio in dB.

    The estimate is projected on the reference,
    :math:`\\alpha = \\langle est, ref \\rangle / \\lVert ref \\rVert^2`,
    and the energy of :math:`\\alpha \\, ref` is compared with the energy of
    what is left. The result is clamped to :math:`[-120, 120]` dB and equals
    the upper cap when nothing is left.

    Parameters
    ----------
    est : Waveform or array_like
        Estimated signal.
    ref : Waveform or array_like
        Reference signal of the same length.

    Returns
    -------
    float
        SI-SDR in dB.

    """
    est, ref = _samples(est), _samples(ref)
    _check_lengths(est, ref)

    ref_energy = np.dot(ref, ref)
    if ref_energy == 0:
        raise SilentSignalError("SI-SDR needs a reference with non-zero energy.")

    alpha = np.dot(est, ref) / ref_energy
    target = alpha * ref
    residual = target - est

    residual_energy = np.dot(residual, residual)
    if residual_energy == 0:
        return SI_SDR_CAP

    with np.errstate(divide="ignore"):
        value = 10.0 * np.log10(np.dot(target, target) / (residual_energy + _SDR_EPSILON))

    return float(np.clip(value, -SI_SDR_CAP, SI_SDR_CAP))


def spectral_convergence(mag_est, mag_ref):
    """Frobenius norm of the magnitude error relative to the reference.

    Zero when both are zero, one when only the reference is zero.

    """
    mag_est, mag_ref = np.asarray(mag_est), np.asarray(mag_ref)
    _check_lengths(mag_est, mag_ref)

    error = np.linalg.norm(mag_ref - mag_est)
    norm = np.linalg.norm(mag_ref)
    if norm == 0:
        return 0.0 if error == 0 else 1.0
    return float(error / norm)


def log_magnitude_l1(mag_est, mag_ref, floor=LOG_FLOOR):
    mag_est, mag_ref = np.asarray(mag_est), np.asarray(mag_ref)
    _check_lengths(mag_est, mag_ref)
    return float(
        np.mean(
            np.abs(np.log(np.maximum(mag_est, floor)) - np.log(np.maximum(mag_ref, floor)))
        )
    )


def log_spectral_distance(s_est, s_ref, stft_cfg=None):
    """Root mean square of the log-magnitude difference in dB over all cells."""
    s_est, s_ref = _as_waveform(s_est), _as_waveform(s_ref)
    _check_lengths(s_est.samples, s_ref.samples)

    cfg = stft_cfg if stft_cfg is not None else StftConfig()
    mag_est = np.maximum(stft(s_est, cfg).magnitude(), _LSD_FLOOR)
    mag_ref = np.maximum(stft(s_ref, cfg).magnitude(), _LSD_FLOOR)

    difference = 20.0 * np.log10(mag_est / mag_ref)
    return float(np.sqrt(np.mean(np.square(difference))))
