"""Codebook files.

A file holds the stack configuration and every stage. After the container
header (magic ``RSEQ`` and version) comes, little-endian::

    u8 scheme tag, u8 n_q, u8 group count, u8 flags (bit 0: reserved zero),
    f64 parallel weight, u16 stage count

then each stage, group by group, as a u8 kind followed by

* scalar (1): u32 dim, u32 K, f64 scale
* vq (2): u32 N, u32 D, u8 reserved zero, N x D binary32 codes, row-major
* fsq (3): u32 dim, dim x u32 level counts, dim x f64 scales
* lfq (4): u32 dim, f64 scale, u8 reserved zero

and the container's CRC-32.

"""
import struct
import warnings

import numpy as np
import torch

from .._container import BinaryReader, read_container, write_container
from ..exceptions import FormatError
from ._codebook import Codebook
from ._creator import __stages__
from ._stack import QuantizerStack, Scheme

__all__ = ["CODEBOOK_MAGIC", "save_codebooks", "load_codebooks"]

CODEBOOK_MAGIC = b"RSEQ"

_KIND_TAGS = {"scalar": 1, "vq": 2, "fsq": 3, "lfq": 4}
_TAG_KINDS = {tag: kind for kind, tag in _KIND_TAGS.items()}


def _pack_stage(stage):
    kind = stage.kind
    parts = [struct.pack("<B", _KIND_TAGS[kind])]

    if kind == "scalar":
        parts.append(struct.pack("<IId", stage.dim, stage.K, stage.scale))
    elif kind == "vq":
        codebook = stage.codebook
        vectors = codebook.vectors
        published = vectors.to(torch.float32)
        if not torch.equal(published.to(torch.float64), vectors):
            warnings.warn(
                "Codebook vectors are rounded to binary32 when saved.", UserWarning
            )
        parts.append(
            struct.pack("<IIB", codebook.size, codebook.dim, codebook.reserved_zero)
        )
        parts.append(published.numpy().astype("<f4").tobytes())
    elif kind == "fsq":
        parts.append(struct.pack("<I", stage.dim))
        parts.append(stage.levels.numpy().astype("<u4").tobytes())
        parts.append(stage.scale.numpy().astype("<f8").tobytes())
    else:
        parts.append(struct.pack("<IdB", stage.dim, stage.scale, stage.reserved_zero))

    return b"".join(parts)


def _unpack_stage(reader):
    tag = reader.take("<B")
    if tag not in _TAG_KINDS:
        raise FormatError(f"Unknown stage kind {tag}.")
    kind = _TAG_KINDS[tag]
    stage_class = __stages__[kind]

    if kind == "scalar":
        dim, K, scale = reader.take("<IId")
        return stage_class(dim, K, scale=scale)
    if kind == "vq":
        size, dim, reserved = reader.take("<IIB")
        vectors = reader.take_array("<f4", size * dim).reshape(size, dim)
        codebook = Codebook(
            size,
            dim,
            reserved_zero=bool(reserved),
            vectors=torch.from_numpy(vectors.astype(np.float64)),
        )
        return stage_class(codebook)
    if kind == "fsq":
        dim = reader.take("<I")
        levels = reader.take_array("<u4", dim).astype(np.int64)
        scale = reader.take_array("<f8", dim)
        return stage_class(dim, levels, scale=scale)

    dim, scale, reserved = reader.take("<IdB")
    return stage_class(dim, scale, reserved_zero=bool(reserved))


def save_codebooks(stack, path):
    """Write a stack to a codebook file, atomically."""
    stages = stack.stages()
    header = struct.pack(
        "<BBBBdH",
        stack.scheme.tag,
        stack.n_q,
        stack.group_count,
        int(stack.reserved_zero),
        stack.parallel_weight,
        len(stages),
    )
    body = header + b"".join(_pack_stage(stage) for stage in stages)
    write_container(path, CODEBOOK_MAGIC, body)


def load_codebooks(path):
    """Read a stack written by :func:`save_codebooks`.

    Raises
    ------
    FormatError
        If the file is not a codebook file, is truncated or is inconsistent.
    UnsupportedVersionError
        If the file has another format version.
    ChecksumError
        If the checksum does not match.

    """
    reader = BinaryReader(read_container(path, CODEBOOK_MAGIC), name=path)
    tag, n_q, group_count, flags, weight, stage_count = reader.take("<BBBBdH")

    if tag >= len(Scheme):
        raise FormatError(f"{path} has unknown scheme tag {tag}.")
    if group_count == 0 or stage_count % group_count:
        raise FormatError(f"{path} has {stage_count} stages in {group_count} groups.")

    try:
        stages = [_unpack_stage(reader) for _ in range(stage_count)]
    except FormatError:
        raise
    except ValueError as e:
        raise FormatError(f"{path} holds an invalid stage: {e}") from e

    if not reader.at_end():
        raise FormatError(f"{path} has trailing bytes.")

    per_group = stage_count // group_count
    groups = [stages[i * per_group : (i + 1) * per_group] for i in range(group_count)]

    try:
        stack = QuantizerStack(
            Scheme.from_tag(tag),
            groups,
            parallel_weight=weight,
            reserved_zero=bool(flags & 1),
        )
    except ValueError as e:
        raise FormatError(f"{path} describes an invalid stack: {e}") from e

    if stack.n_q != n_q:
        raise FormatError(f"{path} declares {n_q} stages, found {stack.n_q}.")

    return stack
