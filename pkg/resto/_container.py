"""Binary container shared by codebook files and intermediate array blobs.

Layout: 4-byte magic, little-endian u16 version, body, then the CRC-32 of
every preceding byte as a little-endian u32.

"""
import struct
import zlib

import numpy as np

from .exceptions import ChecksumError, FormatError, UnsupportedVersionError
from .utils import atomic_write

__all__ = [
    "FORMAT_VERSION",
    "BLOB_KINDS",
    "BinaryReader",
    "write_container",
    "read_container",
    "save_arrays",
    "load_arrays",
]

FORMAT_VERSION = 1

BLOB_MAGIC = b"RSEB"

BLOB_KINDS = {"mask": 1, "features": 2, "codes": 3, "waveform": 4}

_DTYPE_CODES = {
    np.dtype("<f4"): 1,
    np.dtype("<f8"): 2,
    np.dtype("<c16"): 3,
    np.dtype("<i8"): 4,
}
_CODE_DTYPES = {code: dtype for dtype, code in _DTYPE_CODES.items()}


class BinaryReader:
    """Sequential reader over a byte string that fails on truncation."""

    def __init__(self, buffer, name="file"):
        self._buffer = buffer
        self._offset = 0
        self._name = name

    def take(self, fmt):
        size = struct.calcsize(fmt)
        if self._offset + size > len(self._buffer):
            raise FormatError(f"{self._name} is truncated.")
        values = struct.unpack_from(fmt, self._buffer, self._offset)
        self._offset += size
        return values if len(values) > 1 else values[0]

    def take_array(self, dtype, count):
        dtype = np.dtype(dtype)
        size = dtype.itemsize * count
        if self._offset + size > len(self._buffer):
            raise FormatError(f"{self._name} is truncated.")
        array = np.frombuffer(self._buffer, dtype=dtype, count=count, offset=self._offset)
        self._offset += size
        return array.copy()

    def at_end(self):
        return self._offset == len(self._buffer)


def write_container(path, magic, body):
    payload = magic + struct.pack("<H", FORMAT_VERSION) + body
    crc = zlib.crc32(payload) & 0xFFFFFFFF
    with atomic_write(path) as f:
        f.write(payload)
        f.write(struct.pack("<I", crc))


def read_container(path, magic):
    """Validate a container file and return its body bytes."""
    with open(path, "rb") as f:
        data = f.read()

    if len(data) < len(magic) + 2 + 4:
        raise FormatError(f"{path} is truncated.")
    if data[: len(magic)] != magic:
        raise FormatError(f"{path} does not start with magic {magic!r}.")

    (version,) = struct.unpack_from("<H", data, len(magic))
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"{path} has format version {version}, "
            f"only version {FORMAT_VERSION} is supported."
        )

    payload, (crc,) = data[:-4], struct.unpack("<I", data[-4:])
    if zlib.crc32(payload) & 0xFFFFFFFF != crc:
        raise ChecksumError(f"{path} failed its checksum.")

    return payload[len(magic) + 2 :]


def save_arrays(path, kind, arrays):
    """Save a list of arrays as a blob of the given kind.

    Parameters
    ----------
    path : str
        Output file.
    kind : str
        One of "mask", "features", "codes" or "waveform".
    arrays : list of ndarray
        Arrays of type float32, float64, complex128 or int64.

    """
    if kind not in BLOB_KINDS:
        raise ValueError(f"Unknown blob kind {kind}.")

    parts = [struct.pack("<BH", BLOB_KINDS[kind], len(arrays))]
    for array in arrays:
        array = np.asarray(array)
        dtype = array.dtype.newbyteorder("<")
        if dtype not in _DTYPE_CODES:
            raise ValueError(f"Arrays of type {array.dtype} cannot be stored.")
        parts.append(struct.pack("<BB", _DTYPE_CODES[dtype], array.ndim))
        parts.append(struct.pack(f"<{array.ndim}I", *array.shape))
        parts.append(np.ascontiguousarray(array, dtype=dtype).tobytes())

    write_container(path, BLOB_MAGIC, b"".join(parts))


def load_arrays(path, kind=None):
    """Load a blob written by :func:`save_arrays`.

    Returns
    -------
    tuple
        The blob kind and its list of arrays.

    """
    reader = BinaryReader(read_container(path, BLOB_MAGIC), name=path)
    kind_code, count = reader.take("<BH")

    kinds = {code: name for name, code in BLOB_KINDS.items()}
    if kind_code not in kinds:
        raise FormatError(f"{path} has unknown blob kind {kind_code}.")
    if kind is not None and kinds[kind_code] != kind:
        raise FormatError(f"{path} holds {kinds[kind_code]}, expected {kind}.")

    arrays = []
    for _ in range(count):
        dtype_code, ndim = reader.take("<BB")
        if dtype_code not in _CODE_DTYPES:
            raise FormatError(f"{path} has unknown array type {dtype_code}.")
        shape = reader.take(f"<{ndim}I") if ndim else ()
        if ndim == 1:
            shape = (shape,)
        count_items = int(np.prod(shape)) if ndim else 1
        arrays.append(
            reader.take_array(_CODE_DTYPES[dtype_code], count_items).reshape(shape)
        )

    if not reader.at_end():
        raise FormatError(f"{path} has trailing bytes.")

    return kinds[kind_code], arrays
