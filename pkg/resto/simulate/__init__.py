"""Room impulse responses, noisy-reverberant mixing and dataset synthesis."""

from ._dataset import (
    MANIFEST_COLUMNS,
    DatasetConfig,
    ManifestEntry,
    MixtureDataset,
    load_manifest,
    load_record,
    pseudo_speech,
    synthesize_dataset,
    write_manifest,
)
from ._mixing import CLEAN_SNR, MixtureRecord, apply_rir, mix_at_snr
from ._room import (
    RIR,
    RoomSpec,
    estimate_rt60,
    generate_rir,
    minimum_rt60,
    wall_absorption,
)

__all__ = [
    "RoomSpec",
    "RIR",
    "generate_rir",
    "estimate_rt60",
    "wall_absorption",
    "minimum_rt60",
    "MixtureRecord",
    "CLEAN_SNR",
    "apply_rir",
    "mix_at_snr",
    "DatasetConfig",
    "ManifestEntry",
    "MANIFEST_COLUMNS",
    "MixtureDataset",
    "synthesize_dataset",
    "pseudo_speech",
    "write_manifest",
    "load_manifest",
    "load_record",
]
