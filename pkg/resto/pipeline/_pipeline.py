# noqa: D100

import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from joblib import Parallel, delayed
from torch import nn

from .._container import load_arrays, save_arrays
from ..dsp import FusionConfig, StftConfig, fuse_features, stft
from ..exceptions import FormatError, ShapeMismatchError
from ..objectives import log_spectral_distance, si_sdr
from ..quantize import QuantizeResult, quantize
from ..simulate import MixtureRecord
from ..utils import Waveform, check_same_rate
from ._adapter import CodecAdapterConfig, decode_features, encode_features
from ._masking import MaskSource, run_dn

__all__ = [
    "PipelineConfig",
    "RestorationOutput",
    "PipelineOutput",
    "run_dr",
    "run_pipeline",
    "run_many",
    "evaluate",
    "save_waveform",
    "load_waveform",
]

_logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PipelineConfig:

    """Configuration of both stages.

    Attributes
    ----------
    mask : MaskSource
        Mask of the denoising stage.
    stft : StftConfig
        Analysis of the denoising stage.
    fusion : FusionConfig, optional
        Merge of denoised and mixture magnitudes before the codec. Without
        it, the codec sees the denoised magnitudes.
    stack : QuantizerStack, optional
        Quantizer. Without it, features reach the decoder unquantized.
    adapter : CodecAdapterConfig
        Feature analysis and synthesis.

    """

    mask: MaskSource = field(default_factory=MaskSource)
    stft: StftConfig = field(default_factory=StftConfig)
    fusion: Optional[FusionConfig] = None
    stack: Optional[nn.Module] = None
    adapter: CodecAdapterConfig = field(default_factory=CodecAdapterConfig)

    def __post_init__(self):
        if self.stack is not None and self.stack.dim != self.adapter.dim:
            raise ShapeMismatchError(
                f"The quantizer works on {self.stack.dim} dimensions, "
                f"the adapter produces {self.adapter.dim}."
            )


class RestorationOutput(NamedTuple):
    restored: Waveform
    codes: Optional[QuantizeResult]
    codec_input: np.ndarray
    features: np.ndarray


class PipelineOutput(NamedTuple):

    """Result of :func:`run_pipeline`.

    Attributes
    ----------
    denoised : Waveform
        Output of the denoising stage.
    restored : Waveform
        Output of the restoration stage.
    codes : QuantizeResult or None
        Quantizer output, None for an unquantized run.
    metrics : OrderedDict
        Metrics against the available references.
    codec_input : ndarray
        Magnitudes encoded by the adapter.
    features : ndarray
        Unquantized features.

    """

    denoised: Waveform
    restored: Waveform
    codes: Optional[QuantizeResult]
    metrics: "OrderedDict[str, float]"
    codec_input: np.ndarray
    features: np.ndarray


def run_dr(denoised, mixture=None, cfg=None):
    """Run the restoration stage alone.

    The denoised signal, fused with the mixture when `cfg.fusion` is set, is
    encoded, quantized when `cfg.stack` is set, and decoded.

    Parameters
    ----------
    denoised : Waveform
        Output of the denoising stage.
    mixture : Waveform, optional
        Original mixture, required by fusion and by mixture phase.
    cfg : PipelineConfig, optional
        Pipeline configuration.

    Returns
    -------
    RestorationOutput
        Restored waveform, codes, codec input magnitudes and features.

    """
    if cfg is None:
        cfg = PipelineConfig()
    adapter = cfg.adapter

    needs_mixture = cfg.fusion is not None or adapter.phase_source == "from_mixture"
    if needs_mixture and mixture is None:
        raise ValueError("Fusion and mixture phase need the mixture signal.")

    denoised_spec = stft(denoised, adapter.stft)
    mixture_spec = None
    if mixture is not None:
        check_same_rate(denoised, mixture)
        mixture_spec = stft(mixture, adapter.stft)

    if cfg.fusion is not None:
        codec_input = fuse_features(
            denoised_spec.magnitude(), mixture_spec.magnitude(), cfg.fusion
        )
    else:
        codec_input = denoised_spec.magnitude()

    phase_from = mixture_spec if adapter.phase_source == "from_mixture" else denoised_spec
    features, sidecar = encode_features(codec_input, adapter, phase_from=phase_from)

    if cfg.stack is not None:
        codes = quantize(cfg.stack, features)
        quantized = codes.quantized
    else:
        codes = None
        quantized = features

    restored = decode_features(quantized, sidecar, adapter)

    return RestorationOutput(restored, codes, codec_input, features)


def _feature_metrics(codes, features):
    metrics = OrderedDict()
    if codes is None:
        metrics["feature_mse"] = 0.0
        return metrics

    metrics["feature_mse"] = float(np.mean(np.square(codes.quantized - features)))
    for i, energy in enumerate(codes.per_stage_residual_energy, start=1):
        metrics[f"residual_energy_{i}"] = float(energy)
    return metrics


def run_pipeline(rec, cfg=None):
    """Run denoising then restoration on a mixture.

    Parameters
    ----------
    rec : MixtureRecord or Waveform
        A record, whose reverberant signal is the denoising target and whose
        dry and reverberant signals are the references of the metrics, or a
        bare mixture.
    cfg : PipelineConfig, optional
        Pipeline configuration.

    Returns
    -------
    PipelineOutput
        Outputs of both stages and their metrics. For a bare mixture only
        feature-domain metrics are computed.

    """
    if cfg is None:
        cfg = PipelineConfig()

    if isinstance(rec, MixtureRecord):
        y, target = rec.mixture, rec.reverberant
    else:
        y, target = rec, None

    denoised = run_dn(y, cfg.mask, x=target, stft_cfg=cfg.stft)
    restoration = run_dr(denoised, y, cfg)

    out = PipelineOutput(
        denoised=denoised,
        restored=restoration.restored,
        codes=restoration.codes,
        metrics=OrderedDict(),
        codec_input=restoration.codec_input,
        features=restoration.features,
    )

    if isinstance(rec, MixtureRecord):
        metrics = evaluate(out, rec)
    else:
        metrics = _feature_metrics(out.codes, out.features)

    return out._replace(metrics=metrics)


def run_many(records, cfg=None, jobs=1):
    """Run the pipeline on several records; outputs follow the input order."""
    return Parallel(n_jobs=jobs)(delayed(run_pipeline)(rec, cfg) for rec in records)


def evaluate(out, refs, stft_cfg=None):
    """Metrics of a pipeline output against the references of a record.

    Returns
    -------
    OrderedDict
        ``si_sdr_dry`` and ``si_sdr_reverb`` of the restored signal, its
        ``lsd`` to the dry signal, ``feature_mse`` and one
        ``residual_energy_<i>`` per quantizer stage.

    Raises
    ------
    ShapeMismatchError
        If the lengths differ.

    """
    restored = out.restored
    if len(restored) != len(refs.dry):
        raise ShapeMismatchError(
            f"Restored signal has {len(restored)} samples, "
            f"references have {len(refs.dry)}."
        )

    metrics = OrderedDict()
    metrics["si_sdr_dry"] = si_sdr(restored, refs.dry)
    metrics["si_sdr_reverb"] = si_sdr(restored, refs.reverberant)
    metrics["lsd"] = log_spectral_distance(restored, refs.dry, stft_cfg)
    metrics.update(_feature_metrics(out.codes, out.features))

    return metrics


def save_waveform(path, waveform):
    """Store a waveform losslessly as a blob."""
    save_arrays(
        path,
        "waveform",
        [waveform.samples, np.array([waveform.sample_rate], dtype=np.int64)],
    )


def load_waveform(path):
    _, arrays = load_arrays(path, kind="waveform")
    if len(arrays) != 2 or arrays[1].shape != (1,):
        raise FormatError(f"{path} does not hold samples and a sample rate.")
    return Waveform(arrays[0], int(arrays[1][0]))
