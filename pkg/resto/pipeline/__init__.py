"""Two-stage denoising and restoration pipeline and its reports."""

from ._adapter import (
    FEATURE_DOMAINS,
    PHASE_SOURCES,
    PROJECTIONS,
    CodecAdapterConfig,
    FeatureSidecar,
    decode_features,
    encode_features,
    sidecar_arrays,
    sidecar_from_arrays,
)
from ._masking import MASK_KINDS, MaskSource, load_mask, run_dn, save_mask
from ._pipeline import (
    PipelineConfig,
    PipelineOutput,
    RestorationOutput,
    evaluate,
    load_waveform,
    run_dr,
    run_many,
    run_pipeline,
    save_waveform,
)
from ._report import Report, read_report, summarize, write_report

__all__ = [
    "MaskSource",
    "MASK_KINDS",
    "run_dn",
    "save_mask",
    "load_mask",
    "CodecAdapterConfig",
    "FeatureSidecar",
    "PROJECTIONS",
    "PHASE_SOURCES",
    "FEATURE_DOMAINS",
    "encode_features",
    "decode_features",
    "sidecar_arrays",
    "sidecar_from_arrays",
    "PipelineConfig",
    "RestorationOutput",
    "PipelineOutput",
    "run_dr",
    "run_pipeline",
    "run_many",
    "evaluate",
    "save_waveform",
    "load_waveform",
    "Report",
    "write_report",
    "read_report",
    "summarize",
]
