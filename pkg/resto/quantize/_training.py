# noqa: D100

import logging
import warnings
from dataclasses import dataclass
from typing import List, NamedTuple

import numpy as np
import torch
from sklearn.cluster import KMeans

from ..exceptions import ConfigError
from ._codebook import nearest_code
from ._stack import _as_features, quantize
from ._stages import VectorStage

__all__ = ["TrainConfig", "TrainRow", "TrainStats", "train_codebooks"]

_logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:

    """Codebook training parameters.

    Attributes
    ----------
    epochs : int
        Full-batch EMA epochs per stage.
    ema_decay : float
        Decay :math:`\\gamma` of the running counts and sums.
    kmeans_init_iters : int
        Iterations of the k-means++ initialization.
    seed : int
        Seed of the initialization and of dead-code reseeding.
    dead_code_threshold : float
        Codes whose running count falls below this fraction of the average
        count are reseeded from training vectors.

    """

    epochs: int = 10
    ema_decay: float = 0.99
    kmeans_init_iters: int = 20
    seed: int = 0
    dead_code_threshold: float = 1e-3

    def __post_init__(self):
        if self.epochs < 0:
            raise ConfigError(f"epochs must be non-negative, got {self.epochs}.")
        if not 0.0 <= self.ema_decay < 1.0:
            raise ConfigError(f"ema_decay must be in [0, 1), got {self.ema_decay}.")
        if self.kmeans_init_iters < 1:
            raise ConfigError("kmeans_init_iters must be at least 1.")
        if self.dead_code_threshold < 0:
            raise ConfigError("dead_code_threshold must be non-negative.")


class TrainRow(NamedTuple):
    group: int
    stage: int
    epoch: int
    mse: float
    dead_codes: int


class TrainStats(NamedTuple):
    """Per-epoch quantization error of every codebook and the final error."""

    rows: List[TrainRow]
    final_mse: float

    def column(self, name, group=None, stage=None):
        return [
            getattr(row, name)
            for row in self.rows
            if (group is None or row.group == group)
            and (stage is None or row.stage == stage)
        ]


def _stage_seed(seed, group, stage):
    return int(np.random.SeedSequence([seed, group, stage]).generate_state(1)[0])


def _assign(residual, codebook):
    indices = nearest_code(residual, codebook)
    counts = torch.bincount(indices, minlength=codebook.size).to(torch.float64)
    sums = torch.zeros_like(codebook.vectors).index_add_(0, indices, residual)
    error = (residual - codebook.vectors[indices]).square().mean()
    return counts, sums, float(error)


def _initialize(codebook, residual, cfg, seed):
    first = codebook.first_free
    free = codebook.size - first
    distinct = torch.unique(residual, dim=0).shape[0]

    if distinct < free:
        warnings.warn(
            f"Only {distinct} distinct training vectors for {free} codes; "
            f"{free - distinct} codes will be dead.",
            RuntimeWarning,
        )

    clusters = min(free, distinct)
    kmeans = KMeans(
        n_clusters=clusters,
        init="k-means++",
        n_init=1,
        max_iter=cfg.kmeans_init_iters,
        random_state=seed,
    )
    kmeans.fit(residual.numpy())

    centers = torch.from_numpy(kmeans.cluster_centers_).to(torch.float64)
    vectors = codebook.vectors.clone()
    vectors[first : first + clusters] = centers
    # surplus codes repeat the first center and lose every tie to it
    vectors[first + clusters :] = centers[0]
    codebook.set_vectors(vectors)

    counts = torch.zeros(codebook.size, dtype=torch.float64)
    labels = torch.from_numpy(kmeans.labels_.astype(np.int64)) + first
    counts.index_add_(0, labels, torch.ones(labels.shape[0], dtype=torch.float64))
    codebook.ema_counts.copy_(counts)
    codebook.ema_sums.copy_(codebook.vectors * counts.unsqueeze(1))


def _reseed_dead_codes(codebook, residual, cfg, generator):
    first = codebook.first_free
    counts = codebook.ema_counts[first:]
    if counts.numel() == 0:
        return 0

    dead = torch.nonzero(counts < cfg.dead_code_threshold * counts.mean()).flatten()
    if dead.numel() == 0:
        return 0

    dead = dead + first
    picks = torch.randint(residual.shape[0], (dead.numel(),), generator=generator)
    codebook.vectors[dead] = residual[picks]
    codebook.ema_counts[dead] = 1.0
    codebook.ema_sums[dead] = residual[picks]

    return int(dead.numel())


def _train_codebook(codebook, residual, cfg, group, stage):
    seed = _stage_seed(cfg.seed, group, stage)
    generator = torch.Generator().manual_seed(seed)
    first = codebook.first_free

    _initialize(codebook, residual, cfg, seed)

    rows = []
    for epoch in range(cfg.epochs):
        counts, sums, _ = _assign(residual, codebook)

        gamma = cfg.ema_decay
        codebook.ema_counts.mul_(gamma).add_((1.0 - gamma) * counts)
        codebook.ema_sums.mul_(gamma).add_((1.0 - gamma) * sums)

        used = codebook.ema_counts > 0
        used[:first] = False
        means = codebook.ema_sums[used] / codebook.ema_counts[used].unsqueeze(1)
        codebook.vectors[used] = means

        dead_codes = _reseed_dead_codes(codebook, residual, cfg, generator)
        codebook._pin_zero()

        _, _, mse = _assign(residual, codebook)
        rows.append(TrainRow(group, stage, epoch, mse, dead_codes))
        _logger.debug(
            "Group %d stage %d epoch %d: mse %.6g, %d dead codes.",
            group,
            stage,
            epoch,
            mse,
            dead_codes,
        )

    # codebook files store binary32 codes
    codebook.set_vectors(codebook.vectors.to(torch.float32).to(torch.float64))

    if rows and rows[-1].dead_codes:
        warnings.warn(
            f"Codebook of group {group} stage {stage} still had "
            f"{rows[-1].dead_codes} dead codes in the last epoch.",
            RuntimeWarning,
        )

    return rows


@torch.no_grad()
def train_codebooks(stack, data, cfg=None):
    """Train every codebook of a stack on its own residual stream.

    Stages are trained greedily in order. A codebook is initialized with
    k-means++ on the residual its stage receives, then refined with full-batch
    EMA updates

    .. math::
        n \\leftarrow \\gamma n + (1 - \\gamma) n_{batch}, \\quad
        s \\leftarrow \\gamma s + (1 - \\gamma) s_{batch}, \\quad
        c = s / n,

    skipping the reserved zero code. Non-codebook stages are applied as they
    are to produce the residual of the next stage. The parallel scheme trains
    its codebook chain on the features themselves.

    Parameters
    ----------
    stack : QuantizerStack
        Stack to train in place.
    data : ndarray or list of ndarray
        Feature matrices of shape :math:`(F_i, D)`.
    cfg : TrainConfig, optional
        Training parameters.

    Returns
    -------
    TrainStats
        Mean squared error after each epoch of each codebook, and the feature
        MSE of the trained stack.

    """
    if cfg is None:
        cfg = TrainConfig()

    if isinstance(data, (list, tuple)):
        if len(data) == 0:
            raise ValueError("Cannot train codebooks without data.")
        data = np.concatenate([np.asarray(d, dtype=np.float64) for d in data], axis=0)

    features = _as_features(data, stack.dim)
    if features.shape[0] == 0:
        raise ValueError("Cannot train codebooks without data.")

    rows = []
    for group, (stages, columns) in enumerate(zip(stack.groups, stack.group_slices())):
        residual = features[:, columns].clone()
        chain = stages[1:] if stack.is_parallel else stages
        offset = 1 if stack.is_parallel else 0

        for index, stage in enumerate(chain, start=offset):
            if isinstance(stage, VectorStage):
                _logger.info(
                    "Training stage %d/%d of group %d...",
                    index + 1,
                    len(stages),
                    group,
                )
                rows += _train_codebook(stage.codebook, residual, cfg, group, index)

            reconstruction, _ = stage(residual)
            residual = residual - reconstruction

    result = quantize(stack, features)
    final_mse = float(np.mean(np.square(features.numpy() - result.quantized)))
    _logger.info("Trained %s stack, feature MSE %.6g.", stack.scheme.value, final_mse)

    return TrainStats(rows, final_mse)
