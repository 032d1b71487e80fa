# noqa: D100

import torch
from torch import nn

from ..exceptions import ShapeMismatchError

__all__ = ["Codebook", "nearest_code"]

# rows x codes x dims handled by one distance evaluation
_CHUNK_ELEMENTS = 1 << 22


class Codebook(nn.Module):

    """Set of code vectors with exponential-moving-average statistics.

    Parameters
    ----------
    size : int
        Number of codes :math:`N`.
    dim : int
        Code dimension :math:`D`.
    reserved_zero : bool, optional
        Pin code 0 to the zero vector and never update it, by default False.
    vectors : torch.Tensor, optional
        Initial codes of shape :math:`(N, D)`, by default zeros.

    """

    def __init__(self, size, dim, reserved_zero=False, vectors=None):
        super().__init__()

        if size < 1 or dim < 1:
            raise ValueError(f"Invalid codebook shape ({size}, {dim}).")

        self.size = int(size)
        self.dim = int(dim)
        self.reserved_zero = bool(reserved_zero)

        if vectors is None:
            vectors = torch.zeros(size, dim, dtype=torch.float64)
        else:
            vectors = torch.as_tensor(vectors, dtype=torch.float64).clone()
            if vectors.shape != (size, dim):
                raise ShapeMismatchError(
                    f"Codebook vectors of shape {tuple(vectors.shape)} "
                    f"do not match ({size}, {dim})."
                )

        self.register_buffer("vectors", vectors)
        self.register_buffer("ema_counts", torch.zeros(size, dtype=torch.float64))
        self.register_buffer("ema_sums", torch.zeros(size, dim, dtype=torch.float64))
        self._pin_zero()

    @property
    def first_free(self):
        """Index of the first trainable code."""
        return 1 if self.reserved_zero else 0

    def _pin_zero(self):
        if self.reserved_zero:
            self.vectors[0].zero_()
            self.ema_counts[0] = 0.0
            self.ema_sums[0].zero_()

    def set_vectors(self, vectors):
        vectors = torch.as_tensor(vectors, dtype=torch.float64)
        if vectors.shape != self.vectors.shape:
            raise ShapeMismatchError(
                f"Codebook vectors of shape {tuple(vectors.shape)} "
                f"do not match {tuple(self.vectors.shape)}."
            )
        self.vectors.copy_(vectors)
        self._pin_zero()

    def lookup(self, indices):
        indices = torch.as_tensor(indices, dtype=torch.int64)
        if indices.numel() and (indices.min() < 0 or indices.max() >= self.size):
            raise ValueError(
                f"Code indices must be in [0, {self.size - 1}], got "
                f"[{int(indices.min())}, {int(indices.max())}]."
            )
        return self.vectors[indices]

    def extra_repr(self):
        return "{}, {}, reserved_zero={}".format(
            self.size, self.dim, self.reserved_zero
        )


@torch.no_grad()
def nearest_code(v, cb):
    """Index of the closest code in squared Euclidean distance.

    Distances are evaluated exactly as :math:`\\sum_d (v_d - c_d)^2`; ties
    resolve to the lowest index.

    Parameters
    ----------
    v : torch.Tensor or array_like
        A vector of shape :math:`(D,)` or rows of shape :math:`(F, D)`.
    cb : Codebook
        Codes to search.

    Returns
    -------
    int or torch.Tensor
        An index for a vector, a tensor of :math:`F` indices for rows.

    """
    v = torch.as_tensor(v, dtype=torch.float64)
    single = v.dim() == 1
    rows = v.unsqueeze(0) if single else v

    if rows.dim() != 2 or rows.shape[1] != cb.dim:
        raise ShapeMismatchError(
            f"Vectors of shape {tuple(v.shape)} do not match codes of "
            f"dimension {cb.dim}."
        )

    chunk = max(1, _CHUNK_ELEMENTS // (cb.size * cb.dim))
    indices = torch.empty(rows.shape[0], dtype=torch.int64)
    for start in range(0, rows.shape[0], chunk):
        block = rows[start : start + chunk]
        distances = (block.unsqueeze(1) - cb.vectors.unsqueeze(0)).square().sum(-1)
        indices[start : start + chunk] = torch.argmin(distances, dim=1)

    return int(indices[0]) if single else indices
