"""Quantization stages.

Every stage maps a residual matrix of shape :math:`(F, D)` to codes with
`encode` and codes back to a reconstruction with `decode`. Calling a stage
returns both, the reconstruction being computed as ``decode(encode(r))`` so
that decoding stored codes reproduces it bit for bit.

"""
import numpy as np
import torch
from torch import nn

from .._constants import SCALAR_LEVELS
from ..exceptions import ShapeMismatchError
from ._codebook import Codebook, nearest_code

__all__ = [
    "scalar_quantize",
    "ScalarStage",
    "FiniteScalarStage",
    "LookupFreeStage",
    "VectorStage",
]


def scalar_quantize(z, K=SCALAR_LEVELS):
    """Bound features with tanh and round them to a grid of step 1/K.

    Outputs take the :math:`2K + 1` values :math:`\\{-K, \\dots, K\\} / K`
    and lie within :math:`1 / (2K)` of :math:`\\tanh(z)`.

    Parameters
    ----------
    z : ndarray or torch.Tensor
        Features.
    K : int, optional
        Grid resolution, by default 8.

    Returns
    -------
    ndarray or torch.Tensor
        Quantized features, of the same type as `z`.

    """
    if int(K) != K or K < 1:
        raise ValueError(f"K must be a positive integer, got {K}.")

    is_numpy = not isinstance(z, torch.Tensor)
    values = torch.as_tensor(np.asarray(z) if is_numpy else z, dtype=torch.float64)
    if not torch.isfinite(values).all():
        raise ValueError("Features must be finite.")

    out = torch.round(torch.tanh(values) * K) / K
    return out.numpy() if is_numpy else out


class _Stage(nn.Module):
    kind = None

    def __init__(self, dim):
        super().__init__()
        if dim < 1:
            raise ValueError(f"Stage dimension must be positive, got {dim}.")
        self.dim = int(dim)

    def _check(self, r):
        r = torch.as_tensor(r, dtype=torch.float64)
        if r.dim() != 2 or r.shape[1] != self.dim:
            raise ShapeMismatchError(
                f"{type(self).__name__} expects rows of dimension {self.dim}, "
                f"got shape {tuple(r.shape)}."
            )
        return r

    def encode(self, r):
        raise NotImplementedError

    def decode(self, codes):
        raise NotImplementedError

    @torch.no_grad()
    def forward(self, r):
        codes = self.encode(r)
        return self.decode(codes), codes


class ScalarStage(_Stage):

    """Scalar grid quantization, optionally at a finer scale.

    Codes are the integers :math:`\\mathrm{round}(K \\tanh(r / s))` in
    :math:`[-K, K]`; the reconstruction is :math:`s \\cdot code / K`.

    """

    kind = "scalar"

    def __init__(self, dim, K=SCALAR_LEVELS, scale=1.0):
        super().__init__(dim)
        if int(K) != K or K < 1:
            raise ValueError(f"K must be a positive integer, got {K}.")
        if scale <= 0:
            raise ValueError(f"Stage scale must be positive, got {scale}.")
        self.K = int(K)
        self.scale = float(scale)

    def encode(self, r):
        r = self._check(r)
        return torch.round(torch.tanh(r / self.scale) * self.K).to(torch.int64)

    def decode(self, codes):
        codes = torch.as_tensor(codes, dtype=torch.int64)
        if codes.numel() and codes.abs().max() > self.K:
            raise ValueError(f"Scalar codes must be in [-{self.K}, {self.K}].")
        return codes.to(torch.float64) / self.K * self.scale

    def extra_repr(self):
        return "{}, K={}, scale={}".format(self.dim, self.K, self.scale)


class FiniteScalarStage(_Stage):

    """Finite scalar quantization with an odd number of levels per dimension.

    A dimension with :math:`L` levels is bounded with tanh and rounded to
    :math:`h = (L - 1) / 2` steps on each side of zero.

    """

    kind = "fsq"

    def __init__(self, dim, levels=5, scale=None):
        super().__init__(dim)

        levels = np.broadcast_to(np.asarray(levels, dtype=np.int64), (dim,)).copy()
        if np.any(levels < 3) or np.any(levels % 2 == 0):
            raise ValueError(f"FSQ level counts must be odd and >= 3, got {levels}.")

        if scale is None:
            scale = np.ones(dim)
        scale = np.broadcast_to(np.asarray(scale, dtype=np.float64), (dim,)).copy()
        if np.any(scale <= 0):
            raise ValueError("FSQ scales must be positive.")

        self.register_buffer("levels", torch.from_numpy(levels))
        self.register_buffer("half_width", torch.from_numpy((levels - 1) // 2))
        self.register_buffer("scale", torch.from_numpy(scale))

    def encode(self, r):
        r = self._check(r)
        return torch.round(torch.tanh(r / self.scale) * self.half_width).to(torch.int64)

    def decode(self, codes):
        codes = torch.as_tensor(codes, dtype=torch.int64)
        if codes.numel() and (codes.abs() > self.half_width).any():
            raise ValueError("FSQ codes exceed their level grid.")
        return codes.to(torch.float64) / self.half_width * self.scale

    def extra_repr(self):
        return "{}, levels={}".format(self.dim, self.levels.tolist())


class LookupFreeStage(_Stage):

    """Sign quantization: every component becomes :math:`\\pm\\delta`.

    Codes are :math:`\\pm 1` per component, zero counting as positive. With
    `reserved_zero` an all-zero code row is emitted instead whenever the zero
    vector is strictly closer to the input row than its sign code.

    """

    kind = "lfq"

    def __init__(self, dim, scale=1.0, reserved_zero=False):
        super().__init__(dim)
        if scale <= 0:
            raise ValueError(f"LFQ scale must be positive, got {scale}.")
        self.scale = float(scale)
        self.reserved_zero = bool(reserved_zero)

    def encode(self, r):
        r = self._check(r)
        ones = torch.ones_like(r)
        codes = torch.where(r >= 0, ones, -ones).to(torch.int64)

        if self.reserved_zero:
            sign_error = (r - codes.to(torch.float64) * self.scale).square().sum(1)
            zero_error = r.square().sum(1)
            codes[zero_error < sign_error] = 0

        return codes

    def decode(self, codes):
        codes = torch.as_tensor(codes, dtype=torch.int64)
        if codes.numel():
            signs = (codes == 1) | (codes == -1)
            zero_rows = (codes == 0).all(1)
            if not self.reserved_zero and not signs.all():
                raise ValueError("LFQ codes must be +1 or -1.")
            if self.reserved_zero and not (signs.all(1) | zero_rows).all():
                raise ValueError("LFQ code rows must be signs or all zeros.")
        return codes.to(torch.float64) * self.scale

    def extra_repr(self):
        return "{}, scale={}, reserved_zero={}".format(
            self.dim, self.scale, self.reserved_zero
        )


class VectorStage(_Stage):
    """Nearest-neighbour search in a codebook; codes are row indices."""

    kind = "vq"

    def __init__(self, codebook):
        super().__init__(codebook.dim)
        self.codebook = codebook

    @classmethod
    def empty(cls, size, dim, reserved_zero=False):
        return cls(Codebook(size, dim, reserved_zero=reserved_zero))

    def encode(self, r):
        return nearest_code(self._check(r), self.codebook)

    def decode(self, codes):
        return self.codebook.lookup(codes)
