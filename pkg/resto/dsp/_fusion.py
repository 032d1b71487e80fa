# noqa: D100

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..exceptions import ConfigError, FormatError, ShapeMismatchError

__all__ = ["FusionConfig", "fuse_features", "load_fusion_weights"]


@dataclass(frozen=True)
class FusionConfig:

    """Merge of denoised and mixture magnitudes.

    Attributes
    ----------
    beta : float
        Weight of the denoised magnitude in the default convex combination.
    weights : ndarray, optional
        Affine map of shape :math:`(1, 3)` or :math:`(bins, 3)`. Each row
        ``(a, b, c)`` gives ``a * denoised + b * mixture + c`` for every bin
        or for its own bin. Overrides `beta` when set.

    """

    beta: float = 0.5
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigError(f"beta must be in [0, 1], got {self.beta}.")
        if self.weights is not None:
            weights = np.asarray(self.weights, dtype=np.float64)
            if weights.ndim != 2 or weights.shape[1] != 3:
                raise ConfigError(
                    f"Fusion weights must have shape (rows, 3), got {weights.shape}."
                )
            object.__setattr__(self, "weights", weights)


def load_fusion_weights(path):
    """Read affine fusion parameters.

    The file holds one ``a b c`` triple per line, whitespace separated, with
    ``#`` comments. A single line applies to every frequency bin; otherwise
    line ``k`` applies to bin ``k``.

    """
    try:
        weights = np.loadtxt(path, comments="#", ndmin=2)
    except ValueError as e:
        raise FormatError(f"Could not parse fusion weights {path}: {e}") from e

    if weights.shape[1] != 3 or weights.shape[0] == 0:
        raise FormatError(f"{path} must hold rows of three numbers.")

    return weights


def fuse_features(mag_denoised, mag_mixture, cfg=None):
    """Combine denoised and mixture magnitude matrices.

    Parameters
    ----------
    mag_denoised, mag_mixture : ndarray
        Magnitudes of shape :math:`(F, bins)`.
    cfg : FusionConfig, optional
        By default the convex combination with :math:`\\beta = 0.5`.

    Returns
    -------
    ndarray
        Fused magnitudes. Affine maps are clipped at zero.

    """
    if cfg is None:
        cfg = FusionConfig()

    mag_denoised = np.asarray(mag_denoised, dtype=np.float64)
    mag_mixture = np.asarray(mag_mixture, dtype=np.float64)
    if mag_denoised.shape != mag_mixture.shape:
        raise ShapeMismatchError(
            f"Magnitudes of shape {mag_denoised.shape} and {mag_mixture.shape} "
            "cannot be fused."
        )

    if cfg.weights is None:
        return cfg.beta * mag_denoised + (1.0 - cfg.beta) * mag_mixture

    weights = cfg.weights
    if weights.shape[0] not in (1, mag_denoised.shape[-1]):
        raise ShapeMismatchError(
            f"{weights.shape[0]} fusion rows do not match "
            f"{mag_denoised.shape[-1]} bins."
        )

    a, b, c = weights[:, 0], weights[:, 1], weights[:, 2]
    return np.maximum(a * mag_denoised + b * mag_mixture + c, 0.0)
