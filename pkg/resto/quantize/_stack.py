# noqa: D100

from enum import Enum
from typing import List, NamedTuple, Optional

import numpy as np
import torch
from torch import nn

from ..exceptions import ShapeMismatchError

__all__ = [
    "Scheme",
    "QuantizerStack",
    "QuantizeResult",
    "quantize",
    "dequantize",
]


class Scheme(str, Enum):
    """Quantization schemes, in the order of their file tags."""

    SQ = "sq"
    RSQ = "rsq"
    RVQ = "rvq"
    SQ_RVQ = "sq_rvq"
    GROUP_SQ_RVQ = "group_sq_rvq"
    SQ_PAR_RVQ = "sq_par_rvq"
    RFSQ = "rfsq"
    RLFQ = "rlfq"

    @property
    def tag(self):
        return list(Scheme).index(self)

    @classmethod
    def from_tag(cls, tag):
        return list(Scheme)[tag]


class QuantizeResult(NamedTuple):

    """Output of :func:`quantize`.

    Attributes
    ----------
    codes : list of ndarray
        Codes of every stage, group by group.
    quantized : ndarray
        Quantized features :math:`\\hat{z}`.
    per_stage_residual_energy : list of float
        Squared norm of the residual left after each stage, summed over
        groups. For the parallel scheme this follows the codebook branch.
    reconstructions : list of ndarray
        Full-width reconstruction of each stage.
    branch_energy : float or None
        Squared error of the scalar branch of the parallel scheme.

    """

    codes: List[np.ndarray]
    quantized: np.ndarray
    per_stage_residual_energy: List[float]
    reconstructions: List[np.ndarray]
    branch_energy: Optional[float] = None


class QuantizerStack(nn.Module):

    """Stages applied to features, possibly on column groups.

    Parameters
    ----------
    scheme : Scheme or str
        Quantization scheme.
    groups : list of list of nn.Module
        Stages of each contiguous column group, in application order.
    parallel_weight : float, optional
        Weight :math:`w` of the scalar branch for the parallel scheme,
        by default 0.5.
    reserved_zero : bool, optional
        Whether residual stages reserve a zero code, by default True.

    """

    def __init__(self, scheme, groups, parallel_weight=0.5, reserved_zero=True):
        super().__init__()

        self.scheme = Scheme(scheme)
        self.groups = nn.ModuleList(nn.ModuleList(stages) for stages in groups)
        self.parallel_weight = float(parallel_weight)
        self.reserved_zero = bool(reserved_zero)

        if len(self.groups) == 0 or any(len(g) == 0 for g in self.groups):
            raise ValueError("A quantizer stack needs at least one stage per group.")
        for stages in self.groups:
            if len({stage.dim for stage in stages}) != 1:
                raise ShapeMismatchError("Stages of a group must share a dimension.")
        if not 0.0 <= self.parallel_weight <= 1.0:
            raise ValueError(
                f"parallel_weight must be in [0, 1], got {self.parallel_weight}."
            )
        if self.is_parallel and len(self.groups) != 1:
            raise ValueError("The parallel scheme works on a single group.")

    @property
    def is_parallel(self):
        return self.scheme is Scheme.SQ_PAR_RVQ

    @property
    def dim(self):
        return sum(stages[0].dim for stages in self.groups)

    @property
    def group_count(self):
        return len(self.groups)

    @property
    def n_q(self):
        """Stage count of a group, without the scalar branch when parallel."""
        count = len(self.groups[0])
        return count - 1 if self.is_parallel else count

    def stages(self):
        """All stages, group by group."""
        return [stage for stages in self.groups for stage in stages]

    def group_slices(self):
        start = 0
        for stages in self.groups:
            yield slice(start, start + stages[0].dim)
            start += stages[0].dim

    def extra_repr(self):
        return "scheme={}, dim={}, n_q={}, groups={}".format(
            self.scheme.value, self.dim, self.n_q, self.group_count
        )


def _as_features(z, dim):
    z = torch.as_tensor(np.asarray(z) if not isinstance(z, torch.Tensor) else z)
    z = z.to(torch.float64)
    if z.dim() != 2 or z.shape[1] != dim:
        raise ShapeMismatchError(
            f"Features of shape {tuple(z.shape)} do not match a stack of "
            f"dimension {dim}."
        )
    if not torch.isfinite(z).all():
        raise ValueError("Features must be finite.")
    return z


@torch.no_grad()
def quantize(stack, z):
    """Quantize a feature matrix with a stack.

    Residual schemes feed each stage with what the previous stages left,
    :math:`r_i = r_{i-1} - \\hat{z}_{i-1}`, and add the stage outputs. The
    parallel scheme runs the scalar stage and the codebook chain on the same
    input and returns :math:`w \\, SQ(z) + (1 - w) \\, RVQ(z)`.

    Parameters
    ----------
    stack : QuantizerStack
        Quantizer.
    z : ndarray or torch.Tensor
        Features of shape :math:`(F, D)`.

    Returns
    -------
    QuantizeResult
        Codes, quantized features and per-stage diagnostics.

    """
    z = _as_features(z, stack.dim)

    if stack.is_parallel:
        stages = stack.groups[0]
        scalar, scalar_codes = stages[0](z)

        residual = z
        total = torch.zeros_like(z)
        codes, energies, reconstructions = [scalar_codes], [], [scalar]
        for stage in stages[1:]:
            reconstruction, stage_codes = stage(residual)
            total = total + reconstruction
            residual = residual - reconstruction
            codes.append(stage_codes)
            energies.append(float(residual.square().sum()))
            reconstructions.append(reconstruction)

        w = stack.parallel_weight
        quantized = w * scalar + (1.0 - w) * total

        return QuantizeResult(
            codes=[c.numpy() for c in codes],
            quantized=quantized.numpy(),
            per_stage_residual_energy=energies,
            reconstructions=[r.numpy() for r in reconstructions],
            branch_energy=float((z - scalar).square().sum()),
        )

    quantized = torch.zeros_like(z)
    energies = [0.0] * stack.n_q
    reconstructions = [torch.zeros_like(z) for _ in range(stack.n_q)]
    codes = []

    for stages, columns in zip(stack.groups, stack.group_slices()):
        residual = z[:, columns]
        total = torch.zeros_like(residual)
        for i, stage in enumerate(stages):
            reconstruction, stage_codes = stage(residual)
            total = total + reconstruction
            residual = residual - reconstruction
            codes.append(stage_codes)
            energies[i] += float(residual.square().sum())
            reconstructions[i][:, columns] = reconstruction
        quantized[:, columns] = total

    return QuantizeResult(
        codes=[c.numpy() for c in codes],
        quantized=quantized.numpy(),
        per_stage_residual_energy=energies,
        reconstructions=[r.numpy() for r in reconstructions],
    )


@torch.no_grad()
def dequantize(stack, codes):
    """Rebuild quantized features from the codes of :func:`quantize`.

    The stage outputs are combined in the same order as in :func:`quantize`,
    so the result is bit-identical to ``quantize(stack, z).quantized``.

    Raises
    ------
    ValueError
        If a code is out of its stage's range or the code count is wrong.

    """
    stages = stack.stages()
    if len(codes) != len(stages):
        raise ValueError(f"Expected codes for {len(stages)} stages, got {len(codes)}.")

    decoded = [stage.decode(c) for stage, c in zip(stages, codes)]
    frames = {d.shape[0] for d in decoded}
    if len(frames) != 1:
        raise ShapeMismatchError("Stage codes disagree on the number of frames.")

    if stack.is_parallel:
        total = torch.zeros_like(decoded[0])
        for reconstruction in decoded[1:]:
            total = total + reconstruction
        w = stack.parallel_weight
        return (w * decoded[0] + (1.0 - w) * total).numpy()

    quantized = torch.zeros(frames.pop(), stack.dim, dtype=torch.float64)
    position = 0
    for group, columns in zip(stack.groups, stack.group_slices()):
        total = None
        for reconstruction in decoded[position : position + len(group)]:
            if total is None:
                total = torch.zeros_like(reconstruction)
            total = total + reconstruction
        quantized[:, columns] = total
        position += len(group)

    return quantized.numpy()
