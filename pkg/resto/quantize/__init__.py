"""Scalar, vector, finite-scalar and lookup-free quantizer stacks."""

from ._codebook import Codebook, nearest_code
from ._creator import create_stack
from ._serialization import CODEBOOK_MAGIC, load_codebooks, save_codebooks
from ._stack import QuantizerStack, QuantizeResult, Scheme, dequantize, quantize
from ._stages import (
    FiniteScalarStage,
    LookupFreeStage,
    ScalarStage,
    VectorStage,
    scalar_quantize,
)
from ._training import TrainConfig, TrainRow, TrainStats, train_codebooks

__all__ = [
    "Codebook",
    "nearest_code",
    "scalar_quantize",
    "ScalarStage",
    "FiniteScalarStage",
    "LookupFreeStage",
    "VectorStage",
    "Scheme",
    "QuantizerStack",
    "QuantizeResult",
    "quantize",
    "dequantize",
    "create_stack",
    "TrainConfig",
    "TrainRow",
    "TrainStats",
    "train_codebooks",
    "CODEBOOK_MAGIC",
    "save_codebooks",
    "load_codebooks",
]
