"""Bit-exact binary snapshots of a :class:`~pcnls.field.Field`.

Layout (little-endian)::

    b"PCNLS1\\0\\0"          magic, 8 bytes
    u32 dim, u32 points
    f64 half_width, f64 time
    points**dim pairs of f64 (re, im), row-major
    u64 FNV-1a checksum of every preceding byte
"""
from __future__ import annotations

import os
import struct

import numpy as np

from .field import Field, Grid

MAGIC = b"PCNLS1\x00\x00"
_HEADER = struct.Struct("<8sIIdd")
_CHECKSUM = struct.Struct("<Q")

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK = 0xFFFFFFFFFFFFFFFF


class SnapshotError(Exception):
    pass


class SnapshotHeaderError(SnapshotError):
    pass


class UnsupportedDimensionError(SnapshotHeaderError):
    pass


class SnapshotTruncatedError(SnapshotError):
    pass


class SnapshotChecksumError(SnapshotError):
    pass


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK
    return h


def encode(f: Field) -> bytes:
    g = f.grid
    header = _HEADER.pack(MAGIC, g.dim, g.points, g.half_width, f.time)
    payload = np.ascontiguousarray(f.samples, dtype="<c16").tobytes()
    body = header + payload
    return body + _CHECKSUM.pack(fnv1a64(body))


def decode(blob: bytes) -> Field:
    if len(blob) < _HEADER.size:
        raise SnapshotTruncatedError(f"file holds {len(blob)} bytes, header needs {_HEADER.size}")
    magic, dim, points, half_width, time = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise SnapshotHeaderError(f"bad magic {magic!r}")
    if dim not in (1, 2):
        raise UnsupportedDimensionError(f"dimension {dim} is not supported")
    if points < 8 or points & (points - 1):
        raise SnapshotHeaderError(f"points per axis {points} is not a power of two >= 8")
    if not (np.isfinite(half_width) and half_width > 0) or not np.isfinite(time):
        raise SnapshotHeaderError("non-finite or non-positive grid metadata")
    n_bytes = 16 * points**dim
    expected = _HEADER.size + n_bytes + _CHECKSUM.size
    if len(blob) < expected:
        raise SnapshotTruncatedError(f"expected {expected} bytes, found {len(blob)}")
    if len(blob) > expected:
        raise SnapshotHeaderError(f"{len(blob) - expected} trailing bytes after checksum")
    body = blob[: _HEADER.size + n_bytes]
    (stored,) = _CHECKSUM.unpack_from(blob, _HEADER.size + n_bytes)
    if fnv1a64(body) != stored:
        raise SnapshotChecksumError("checksum mismatch")
    samples = np.frombuffer(blob, dtype="<c16", count=points**dim, offset=_HEADER.size)
    return Field(Grid(dim, points, half_width), time, samples.astype(np.complex128))


def write_snapshot(f: Field, path: str | os.PathLike) -> None:
    with open(path, "wb") as fh:
        fh.write(encode(f))


def read_snapshot(path: str | os.PathLike) -> Field:
    with open(path, "rb") as fh:
        return decode(fh.read())
