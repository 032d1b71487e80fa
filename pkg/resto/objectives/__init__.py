"""Losses and metrics of the denoising and restoration stages."""

from ._losses import (
    DN_LAMBDA,
    CompositeParts,
    LossWeights,
    MrStftConfig,
    WeightMap,
    codec_composite_loss,
    commitment_loss,
    dn_loss,
    feature_match_loss,
    hinge_adv_loss,
    mr_stft_loss,
    weight_map,
    weighted_dn_loss,
)
from ._metrics import (
    log_magnitude_l1,
    log_spectral_distance,
    si_sdr,
    spectral_convergence,
)

__all__ = [
    "si_sdr",
    "spectral_convergence",
    "log_magnitude_l1",
    "log_spectral_distance",
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
