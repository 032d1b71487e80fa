# noqa: D100

import numpy as np

from .._constants import DIVISION_EPSILON
from ..exceptions import ShapeMismatchError

__all__ = ["ComplexMask", "compute_crm", "apply_mask", "COMPRESSIONS"]

COMPRESSIONS = ("clip", "tanh")


class ComplexMask:

    """Complex time-frequency mask.

    Attributes
    ----------
    data : ndarray
        Complex matrix of shape :math:`(F, bins)`.
    bound : float or None
        Largest complex magnitude of an entry, None when unbounded.

    """

    __slots__ = ("data", "bound")

    def __init__(self, data, bound=None):
        data = np.array(data, dtype=np.complex128)
        if data.ndim != 2:
            raise ShapeMismatchError(f"A mask must be 2-D, got shape {data.shape}.")
        if not np.all(np.isfinite(data)):
            raise ValueError("Mask entries must be finite.")
        if bound is not None:
            if bound <= 0:
                raise ValueError(f"Mask bound must be positive, got {bound}.")
            if np.any(np.abs(data) > bound * (1 + 1e-12)):
                raise ValueError(f"Mask entries exceed the bound {bound}.")

        data.setflags(write=False)
        self.data = data
        self.bound = bound

    @property
    def shape(self):
        return self.data.shape

    @classmethod
    def ones(cls, shape):
        return cls(np.ones(shape, dtype=np.complex128))

    @classmethod
    def zeros(cls, shape):
        return cls(np.zeros(shape, dtype=np.complex128))


def _check_shapes(a, b):
    if a.shape != b.shape:
        raise ShapeMismatchError(f"Shapes {a.shape} and {b.shape} do not match.")


def _limit_magnitude(mask, bound, compression):
    magnitude = np.abs(mask)

    if compression == "clip":
        scale = np.minimum(1.0, bound / np.maximum(magnitude, DIVISION_EPSILON))
    elif compression == "tanh":
        scale = np.divide(
            bound * np.tanh(magnitude / bound),
            magnitude,
            out=np.zeros_like(magnitude),
            where=magnitude > 0,
        )
    else:
        raise ValueError(
            f"Unknown compression {compression}, expected one of {COMPRESSIONS}."
        )

    return mask * scale


def compute_crm(Y, X, bound=None, compression="clip"):
    """Compute the oracle complex ratio mask turning `Y` into `X`.

    :math:`M = X \\bar{Y} / |Y|^2` wherever :math:`|Y|^2 > 10^{-12}`,
    zero elsewhere.

    Parameters
    ----------
    Y : ComplexSpectrogram
        Mixture spectrogram.
    X : ComplexSpectrogram
        Target spectrogram.
    bound : float, optional
        Magnitude limit. Phases are kept.
    compression : str, optional
        ``"clip"`` scales entries above the bound down to it; ``"tanh"``
        maps a magnitude m to ``bound * tanh(m / bound)``.

    Returns
    -------
    ComplexMask
        The mask.

    """
    _check_shapes(Y, X)

    power = np.square(np.abs(Y.data))
    mask = np.divide(
        X.data * np.conj(Y.data),
        power,
        out=np.zeros(Y.shape, dtype=np.complex128),
        where=power > DIVISION_EPSILON,
    )

    if bound is not None:
        mask = _limit_magnitude(mask, bound, compression)

    return ComplexMask(mask, bound=bound)


def apply_mask(Y, M):
    """Multiply a spectrogram by a mask cell by cell."""
    _check_shapes(Y, M)
    return Y.with_data(M.data * Y.data)
