"""Length-prefixed binary primitives shared by the V* artifact formats.

Every on-disk artifact (VSNP snapshots, VEMB matrices, VNET models, ...)
is a 4-byte ASCII magic, a u32 format version, and a sequence of the
primitives below.  All integers are little-endian.
"""

from __future__ import annotations

import struct
from typing import BinaryIO

import numpy as np


class FormatError(ValueError):
    """Magic/version mismatch or malformed field."""


class CorruptError(ValueError):
    """File ended before a declared field was complete."""


def write_magic(fh: BinaryIO, magic: str, version: int) -> None:
    if len(magic) != 4:
        raise ValueError("magic must be 4 ASCII bytes")
    fh.write(magic.encode("ascii"))
    write_u32(fh, version)


def read_magic(fh: BinaryIO, magic: str, max_version: int) -> int:
    """Check the magic and return the file's format version."""
    raw = fh.read(4)
    if len(raw) < 4:
        raise CorruptError("file too short for magic header")
    if raw != magic.encode("ascii"):
        raise FormatError(f"bad magic {raw!r}, expected {magic!r}")
    version = read_u32(fh)
    if version < 1 or version > max_version:
        raise FormatError(f"unsupported {magic} version {version}")
    return version


def _read_exact(fh: BinaryIO, n: int) -> bytes:
    raw = fh.read(n)
    if len(raw) != n:
        raise CorruptError(f"truncated file: wanted {n} bytes, got {len(raw)}")
    return raw


def write_u32(fh: BinaryIO, value: int) -> None:
    fh.write(struct.pack("<I", value))


def read_u32(fh: BinaryIO) -> int:
    return struct.unpack("<I", _read_exact(fh, 4))[0]


def write_i64(fh: BinaryIO, value: int) -> None:
    fh.write(struct.pack("<q", value))


def read_i64(fh: BinaryIO) -> int:
    return struct.unpack("<q", _read_exact(fh, 8))[0]


def write_f64(fh: BinaryIO, value: float) -> None:
    fh.write(struct.pack("<d", value))


def read_f64(fh: BinaryIO) -> float:
    return struct.unpack("<d", _read_exact(fh, 8))[0]


def write_str(fh: BinaryIO, value: str) -> None:
    raw = value.encode("utf-8")
    write_u32(fh, len(raw))
    fh.write(raw)


def read_str(fh: BinaryIO) -> str:
    n = read_u32(fh)
    return _read_exact(fh, n).decode("utf-8")


def write_str_list(fh: BinaryIO, values: list[str]) -> None:
    write_u32(fh, len(values))
    for v in values:
        write_str(fh, v)


def read_str_list(fh: BinaryIO) -> list[str]:
    return [read_str(fh) for _ in range(read_u32(fh))]


def write_f32_matrix(fh: BinaryIO, mat: np.ndarray) -> None:
    """Row-major float32 block prefixed by its shape."""
    mat = np.ascontiguousarray(mat, dtype=np.float32)
    if mat.ndim == 1:
        mat = mat.reshape(1, -1)
    write_u32(fh, mat.shape[0])
    write_u32(fh, mat.shape[1])
    fh.write(mat.tobytes())


def read_f32_matrix(fh: BinaryIO) -> np.ndarray:
    rows = read_u32(fh)
    cols = read_u32(fh)
    raw = _read_exact(fh, rows * cols * 4)
    return np.frombuffer(raw, dtype="<f4").reshape(rows, cols).copy()


def write_i32_array(fh: BinaryIO, arr: np.ndarray) -> None:
    arr = np.ascontiguousarray(arr, dtype=np.int32)
    write_u32(fh, arr.shape[0])
    fh.write(arr.tobytes())


def read_i32_array(fh: BinaryIO) -> np.ndarray:
    n = read_u32(fh)
    raw = _read_exact(fh, n * 4)
    return np.frombuffer(raw, dtype="<i4").copy()
