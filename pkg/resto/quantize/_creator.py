# noqa: D100

import logging

import torch

from .._constants import CODEBOOK_SIZE, FEATURE_DIM, N_QUANTIZERS, SCALAR_LEVELS
from ..exceptions import ConfigError
from ._codebook import Codebook
from ._stack import QuantizerStack, Scheme
from ._stages import FiniteScalarStage, LookupFreeStage, ScalarStage, VectorStage

__all__ = ["create_stack"]

_logger = logging.getLogger(__name__)

__stages__ = {
    "scalar": ScalarStage,
    "vq": VectorStage,
    "fsq": FiniteScalarStage,
    "lfq": LookupFreeStage,
}


def _codebook_stage(size, dim, reserved_zero, generator):
    # small random codes until training replaces them
    vectors = 0.01 * torch.randn(size, dim, dtype=torch.float64, generator=generator)
    return VectorStage(Codebook(size, dim, reserved_zero=reserved_zero, vectors=vectors))


def create_stack(
    scheme,
    dim=FEATURE_DIM,
    n_q=N_QUANTIZERS,
    codebook_size=CODEBOOK_SIZE,
    K=SCALAR_LEVELS,
    fsq_levels=5,
    lfq_scale=1.0,
    group_count=2,
    parallel_weight=0.5,
    reserved_zero=True,
    seed=0,
):
    """Build an untrained quantizer stack.

    Parameters
    ----------
    scheme : Scheme or str
        One of the eight quantization schemes.
    dim : int, optional
        Feature dimension :math:`D`, by default 256.
    n_q : int, optional
        Stages of residual schemes, by default 8. The parallel scheme has
        `n_q` codebook stages besides its scalar stage.
    codebook_size : int, optional
        Codes per codebook :math:`N`, by default 1024.
    K : int, optional
        Scalar grid resolution, by default 8.
    fsq_levels : int or list of int, optional
        Odd level count per dimension of finite scalar stages, by default 5.
    lfq_scale : float, optional
        Output magnitude :math:`\\delta` of the first sign stage, by
        default 1.
    group_count : int, optional
        Column groups of the grouped scheme, by default 2.
    parallel_weight : float, optional
        Scalar branch weight of the parallel scheme, by default 0.5.
    reserved_zero : bool, optional
        Reserve a zero code in every codebook and sign stage, by default True.
    seed : int, optional
        Seed of the initial random codes, by default 0.

    Returns
    -------
    QuantizerStack
        The stack. Residual stage ``i`` of scalar, finite scalar and sign
        schemes works at scale :math:`(L - 1)^{-i}` (:math:`2^{-i}` for sign
        stages) so later stages refine what earlier ones left.

    """
    try:
        scheme = Scheme(scheme)
    except ValueError as e:
        raise ConfigError(f"Unknown quantization scheme {scheme}.") from e

    if dim < 1 or n_q < 1 or codebook_size < 1:
        raise ConfigError("dim, n_q and codebook_size must be positive.")
    if scheme in (Scheme.SQ_RVQ, Scheme.GROUP_SQ_RVQ) and n_q < 2:
        raise ConfigError(f"{scheme.value} needs at least 2 stages.")
    if int(K) != K or K < 1:
        raise ConfigError(f"K must be a positive integer, got {K}.")
    if lfq_scale <= 0:
        raise ConfigError(f"lfq_scale must be positive, got {lfq_scale}.")
    if not 0.0 <= parallel_weight <= 1.0:
        raise ConfigError(f"parallel_weight must be in [0, 1], got {parallel_weight}.")
    levels = torch.as_tensor(fsq_levels, dtype=torch.int64)
    if (levels < 3).any() or (levels % 2 == 0).any():
        raise ConfigError(f"fsq_levels must be odd and at least 3, got {fsq_levels}.")

    generator = torch.Generator().manual_seed(int(seed))
    group_dims = [dim]

    if scheme is Scheme.SQ:
        stages = [ScalarStage(dim, K)]
    elif scheme is Scheme.RSQ:
        stages = [ScalarStage(dim, K, scale=(2.0 * K) ** -i) for i in range(n_q)]
    elif scheme is Scheme.RVQ:
        stages = [
            _codebook_stage(codebook_size, dim, reserved_zero, generator)
            for _ in range(n_q)
        ]
    elif scheme is Scheme.SQ_RVQ:
        stages = [ScalarStage(dim, K)] + [
            _codebook_stage(codebook_size, dim, reserved_zero, generator)
            for _ in range(n_q - 1)
        ]
    elif scheme is Scheme.GROUP_SQ_RVQ:
        if group_count < 1 or dim % group_count:
            raise ConfigError(
                f"dim {dim} is not divisible by group_count {group_count}."
            )
        group_dims = [dim // group_count] * group_count
        stages = None
    elif scheme is Scheme.SQ_PAR_RVQ:
        stages = [ScalarStage(dim, K)] + [
            _codebook_stage(codebook_size, dim, reserved_zero, generator)
            for _ in range(n_q)
        ]
    elif scheme is Scheme.RFSQ:
        stages = [
            FiniteScalarStage(
                dim, fsq_levels, scale=((levels.double() - 1.0) ** -i).numpy()
            )
            for i in range(n_q)
        ]
    else:
        stages = [
            LookupFreeStage(dim, lfq_scale * 2.0 ** -i, reserved_zero=reserved_zero)
            for i in range(n_q)
        ]

    if stages is None:
        groups = [
            [ScalarStage(d, K)]
            + [
                _codebook_stage(codebook_size, d, reserved_zero, generator)
                for _ in range(n_q - 1)
            ]
            for d in group_dims
        ]
    else:
        groups = [stages]

    _logger.debug("Created %s stack of dimension %d.", scheme.value, dim)

    return QuantizerStack(
        scheme, groups, parallel_weight=parallel_weight, reserved_zero=reserved_zero
    )
