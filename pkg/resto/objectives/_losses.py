# noqa: D100

from dataclasses import dataclass
from typing import NamedTuple, Tuple

import numpy as np

from .._constants import WEIGHT_THRESHOLD
from ..dsp import StftConfig, stft
from ..exceptions import ConfigError, ShapeMismatchError
from ._metrics import (
    _as_waveform,
    _check_lengths,
    log_magnitude_l1,
    si_sdr,
    spectral_convergence,
)

__all__ = [
    "DN_LAMBDA",
    "dn_loss",
    "WeightMap",
    "weight_map",
    "weighted_dn_loss",
    "MrStftConfig",
    "mr_stft_loss",
    "commitment_loss",
    "hinge_adv_loss",
    "feature_match_loss",
    "CompositeParts",
    "LossWeights",
    "codec_composite_loss",
]

DN_LAMBDA = 1000.0

_HINGE_SIDES = ("generator", "discriminator_real", "discriminator_fake")


def _magnitudes(est, ref, stft_cfg):
    est, ref = _as_waveform(est), _as_waveform(ref)
    _check_lengths(est.samples, ref.samples)
    cfg = stft_cfg if stft_cfg is not None else StftConfig()
    return stft(est, cfg).magnitude(), stft(ref, cfg).magnitude()


def dn_loss(x_est, x, stft_cfg=None, lam=DN_LAMBDA):
    """Denoising loss: negative SI-SDR plus a weighted magnitude L1 term.

    :math:`-\\mathrm{SI\\text{-}SDR}(\\hat{x}, x) + \\lambda \\,
    \\mathrm{mean} \\lvert |\\hat{X}| - |X| \\rvert`, the mean running over
    all time-frequency cells.

    """
    mag_est, mag_ref = _magnitudes(x_est, x, stft_cfg)
    return -si_sdr(x_est, x) + lam * float(np.mean(np.abs(mag_est - mag_ref)))


class WeightMap(NamedTuple):

    """Per-cell weights of the magnitude term.

    Attributes
    ----------
    alpha : ndarray
        Weights in :math:`[1, 2]`, one outside the mask.
    mask : ndarray
        Cells whose reference magnitude exceeds `threshold`.
    threshold : float
        Reference magnitude threshold.

    """

    alpha: np.ndarray
    mask: np.ndarray
    threshold: float


def weight_map(mag_denoised, mag_ref, threshold=WEIGHT_THRESHOLD):
    """Weights emphasizing over-suppressed cells.

    With :math:`\\Delta = |\\hat{X}| - |X|`, negative differences are doubled,
    :math:`\\Delta' = 2\\Delta` where :math:`\\Delta < 0`, and
    :math:`\\alpha = 1 + M |\\Delta'| / \\max_M |\\Delta'|`, the maximum being
    taken over the cells of the mask :math:`M`. Without any masked-in
    difference, :math:`\\alpha = 1`.

    """
    mag_denoised = np.asarray(mag_denoised, dtype=np.float64)
    mag_ref = np.asarray(mag_ref, dtype=np.float64)
    if mag_denoised.shape != mag_ref.shape:
        raise ShapeMismatchError(
            f"Magnitudes of shape {mag_denoised.shape} and {mag_ref.shape} differ."
        )

    delta = mag_denoised - mag_ref
    emphasized = np.abs(np.where(delta < 0, 2.0 * delta, delta))
    mask = mag_ref > threshold

    peak = emphasized[mask].max() if mask.any() else 0.0
    if peak == 0:
        alpha = np.ones_like(delta)
    else:
        alpha = 1.0 + np.where(mask, emphasized / peak, 0.0)

    return WeightMap(alpha, mask, threshold)


def weighted_dn_loss(x_est, x, stft_cfg=None, lam=DN_LAMBDA, threshold=WEIGHT_THRESHOLD):
    """Denoising loss with the magnitude term weighted by :func:`weight_map`."""
    mag_est, mag_ref = _magnitudes(x_est, x, stft_cfg)
    weights = weight_map(mag_est, mag_ref, threshold)
    l1 = float(np.mean(weights.alpha * np.abs(mag_est - mag_ref)))
    return -si_sdr(x_est, x) + lam * l1


@dataclass(frozen=True)
class MrStftConfig:
    """Resolutions ``(fft_size, hop, window)`` and sub-band count."""

    resolutions: Tuple[Tuple[int, int, str], ...] = (
        (512, 128, "hann"),
        (1024, 256, "hann"),
        (2048, 512, "hann"),
    )
    subbands: int = 4

    def __post_init__(self):
        if len(self.resolutions) == 0:
            raise ConfigError("At least one resolution is needed.")
        if self.subbands < 1:
            raise ConfigError(f"subbands must be positive, got {self.subbands}.")
        for fft_size, hop, window in self.resolutions:
            StftConfig(fft_size, hop, window)

    def stft_configs(self):
        return [StftConfig(n, hop, window) for n, hop, window in self.resolutions]


def _resolution_term(mag_est, mag_ref, subbands):
    fullband = spectral_convergence(mag_est, mag_ref) + log_magnitude_l1(
        mag_est, mag_ref
    )

    bands = zip(
        np.array_split(mag_est, subbands, axis=1),
        np.array_split(mag_ref, subbands, axis=1),
    )
    subband = np.mean(
        [spectral_convergence(e, r) + log_magnitude_l1(e, r) for e, r in bands]
    )

    return (fullband + subband) / 2.0


def mr_stft_loss(y_est, y, cfg=None):
    """Multi-resolution STFT loss over full band and sub-bands.

    For each resolution, spectral convergence plus log-magnitude L1 is
    evaluated on the full band and averaged over equal sub-bands; the two are
    averaged, then the resolutions are.

    """
    if cfg is None:
        cfg = MrStftConfig()

    terms = []
    for stft_cfg in cfg.stft_configs():
        mag_est, mag_ref = _magnitudes(y_est, y, stft_cfg)
        terms.append(_resolution_term(mag_est, mag_ref, cfg.subbands))

    return float(np.mean(terms))


def commitment_loss(z, zq):
    z, zq = np.asarray(z, dtype=np.float64), np.asarray(zq, dtype=np.float64)
    if z.shape != zq.shape:
        raise ShapeMismatchError(f"Features of shape {z.shape} and {zq.shape} differ.")
    return float(np.mean(np.square(z - zq)))


def hinge_adv_loss(scores, side):
    """Hinge adversarial loss on discriminator scores.

    Parameters
    ----------
    scores : array_like
        Discriminator outputs.
    side : str
        ``"generator"`` or ``"discriminator_real"`` give
        :math:`\\mathrm{mean}(\\max(0, 1 - s))`; ``"discriminator_fake"``
        gives :math:`\\mathrm{mean}(\\max(0, 1 + s))`.

    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size == 0:
        raise ValueError("Hinge loss needs at least one score.")
    if side not in _HINGE_SIDES:
        raise ValueError(f"Unknown side {side}, expected one of {_HINGE_SIDES}.")

    if side == "discriminator_fake":
        return float(np.mean(np.maximum(0.0, 1.0 + scores)))
    return float(np.mean(np.maximum(0.0, 1.0 - scores)))


def feature_match_loss(feats_est, feats_ref):
    """Mean absolute difference of feature maps, averaged over layers."""
    if len(feats_est) != len(feats_ref):
        raise ShapeMismatchError(
            f"{len(feats_est)} estimated layers against {len(feats_ref)} references."
        )
    if len(feats_est) == 0:
        raise ValueError("Feature matching needs at least one layer.")

    losses = []
    for est, ref in zip(feats_est, feats_ref):
        est, ref = np.asarray(est, dtype=np.float64), np.asarray(ref, dtype=np.float64)
        if est.shape != ref.shape:
            raise ShapeMismatchError(f"Layers of shape {est.shape} and {ref.shape}.")
        losses.append(np.mean(np.abs(est - ref)))

    return float(np.mean(losses))


class CompositeParts(NamedTuple):
    rec: float
    adv: float
    feat: float
    com: float


@dataclass(frozen=True)
class LossWeights:
    w_rec: float = 1.0
    w_adv: float = 1.0
    w_feat: float = 20.0
    w_com: float = 10.0
    lambda_dn: float = DN_LAMBDA

    def __post_init__(self):
        for name in ("w_rec", "w_adv", "w_feat", "w_com", "lambda_dn"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative.")


def codec_composite_loss(parts, weights=None):
    """Weighted sum of reconstruction, adversarial, feature and commitment losses."""
    if weights is None:
        weights = LossWeights()

    parts = CompositeParts(*parts)
    if not np.all(np.isfinite(parts)):
        raise ValueError(f"Loss parts must be finite, got {parts}.")

    return (
        weights.w_rec * parts.rec
        + weights.w_adv * parts.adv
        + weights.w_feat * parts.feat
        + weights.w_com * parts.com
    )
