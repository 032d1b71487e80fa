import logging
import os

import numpy as np
from joblib import Parallel, delayed

from ..dsp import FusionConfig, StftConfig, load_fusion_weights
from ..exceptions import ConfigError
from ..pipeline import CodecAdapterConfig, MaskSource, PipelineConfig, encode_features
from ..quantize import TrainConfig, create_stack
from ..simulate import DatasetConfig, load_record

_logger = logging.getLogger(__name__)


def build_stft_config(cfg):
    return StftConfig(**cfg.section("stft"))


def build_dataset_config(cfg):
    section = cfg.section("simulate")

    def levels(key):
        return tuple(section[key]) if section[key] is not None else None

    return DatasetConfig(
        count=section["count"],
        segment_seconds=section["segment_seconds"],
        sample_rate=cfg["sample_rate"],
        snr_levels=levels("snr_levels"),
        snr_range=tuple(section["snr_range"]),
        rt60_levels=levels("rt60_levels"),
        rt60_range=tuple(section["rt60_range"]),
        max_reflection_order=section["max_reflection_order"],
        speech_dir=section["speech_dir"],
        noise_dir=section["noise_dir"],
        wav_format=section["wav_format"],
        jobs=section["jobs"],
    )


def build_stack(cfg):
    q = cfg.section("quantizer")
    return create_stack(
        q["scheme"],
        dim=q["D"],
        n_q=q["n_q"],
        codebook_size=q["N"],
        K=q["K"],
        fsq_levels=q["fsq_levels"],
        lfq_scale=q["lfq_scale"],
        group_count=q["group_count"],
        parallel_weight=q["parallel_weight"],
        reserved_zero=q["reserved_zero"],
        seed=cfg["seed"],
    )


def build_train_config(cfg):
    return TrainConfig(seed=cfg["seed"], **cfg.section("train"))


def build_adapter_config(cfg):
    return CodecAdapterConfig(
        stft=build_stft_config(cfg),
        dim=cfg["quantizer.D"],
        seed=cfg["seed"],
        **cfg.section("adapter"),
    )


def mask_path(cfg, utterance_id=None):
    """Mask file of an utterance: `mask.path` itself or ``<id>.mask`` inside it."""
    path = cfg["mask.path"]
    if os.path.isdir(path):
        if utterance_id is None:
            raise ConfigError(f"mask.path {path} is a directory, a file is needed.")
        return os.path.join(path, f"{utterance_id}.mask")
    return path


def build_mask_source(cfg, utterance_id=None):
    kind = cfg["mask.kind"]
    if kind == "file":
        return MaskSource.from_file(mask_path(cfg, utterance_id))
    return MaskSource(kind, bound=cfg["mask.bound"], compression=cfg["mask.compression"])


def build_fusion_config(cfg):
    if cfg["fusion.weights_path"] is not None:
        return FusionConfig(weights=load_fusion_weights(cfg["fusion.weights_path"]))
    if cfg["fusion.beta"] is not None:
        return FusionConfig(beta=cfg["fusion.beta"])
    return None


def build_pipeline_config(cfg, stack=None, mask=None):
    return PipelineConfig(
        mask=mask if mask is not None else build_mask_source(cfg),
        stft=build_stft_config(cfg),
        fusion=build_fusion_config(cfg),
        stack=stack,
        adapter=build_adapter_config(cfg),
    )


def validate(cfg):
    """Build every configuration object once so errors surface before any work.

    Raises
    ------
    ConfigError
        If a value is out of range or a configured input path is missing.

    """
    build_dataset_config(cfg)
    build_stack(cfg)
    build_train_config(cfg)
    build_adapter_config(cfg)

    MaskSource(
        "passthrough" if cfg["mask.kind"] == "file" else cfg["mask.kind"],
        bound=cfg["mask.bound"],
        compression=cfg["mask.compression"],
    )
    if cfg["mask.kind"] == "file":
        cfg.require_existing("mask.path")
    if cfg["fusion.weights_path"] is not None:
        cfg.require_existing("fusion.weights_path")
    elif cfg["fusion.beta"] is not None:
        FusionConfig(beta=cfg["fusion.beta"])


def _reverberant_features(entry, root, adapter):
    record = load_record(entry, root)
    features, _ = encode_features(record.reverberant, adapter)
    return features


def load_training_features(entries, root, adapter, jobs=1):
    """Features of the reverberant signals of manifest rows, the codec input corpus."""
    if len(entries) == 0:
        raise ValueError("The manifest has no records to train on.")

    _logger.info("Encoding %d training records...", len(entries))
    features = Parallel(n_jobs=jobs)(
        delayed(_reverberant_features)(entry, root, adapter) for entry in entries
    )
    return np.concatenate(features, axis=0)
