"""Bit-exact binary checkpoints for ParamSets.

Layout (all little-endian)::

    b"ACPC" | u32 version | u32 tensor_count
    per tensor: u16 name_len | name (utf-8) | u8 rank | u32 dims[rank] | f64 values
"""
from __future__ import annotations

import os
import struct

import numpy as np

from .net import ParamSet

MAGIC = b"ACPC"
FORMAT_VERSION = 1


class CheckpointError(Exception):
    exit_code = 3


class CheckpointNotFound(CheckpointError, FileNotFoundError):
    exit_code = 3


class CheckpointFormatError(CheckpointError):
    exit_code = 4


class CheckpointVersionError(CheckpointError):
    exit_code = 5


class ShapeMismatchError(CheckpointError):
    exit_code = 6


def encode(params: ParamSet) -> bytes:
    parts = [MAGIC, struct.pack("<II", FORMAT_VERSION, len(params))]
    for name, arr in params.items():
        raw = name.encode("utf-8")
        arr = np.asarray(arr, dtype=np.float64)
        parts.append(struct.pack("<H", len(raw)) + raw)
        parts.append(struct.pack("<B", arr.ndim) + struct.pack(f"<{arr.ndim}I", *arr.shape))
        parts.append(arr.astype("<f8").tobytes(order="C"))
    return b"".join(parts)


def decode(data: bytes) -> ParamSet:
    if data[:4] != MAGIC:
        raise CheckpointFormatError("not a checkpoint (bad magic bytes)")
    try:
        version, count = struct.unpack_from("<II", data, 4)
        if version != FORMAT_VERSION:
            raise CheckpointVersionError(
                f"checkpoint format version {version}, expected {FORMAT_VERSION}"
            )
        pos = 12
        params: ParamSet = {}
        for _ in range(count):
            (nlen,) = struct.unpack_from("<H", data, pos)
            pos += 2
            name = data[pos : pos + nlen].decode("utf-8")
            pos += nlen
            (rank,) = struct.unpack_from("<B", data, pos)
            pos += 1
            shape = struct.unpack_from(f"<{rank}I", data, pos)
            pos += 4 * rank
            size = int(np.prod(shape, dtype=np.int64))
            if pos + 8 * size > len(data):
                raise CheckpointFormatError(f"truncated data in tensor {name!r}")
            arr = np.frombuffer(data, dtype="<f8", count=size, offset=pos).reshape(shape)
            params[name] = arr.astype(np.float64)
            pos += 8 * size
    except struct.error as exc:
        raise CheckpointFormatError(f"truncated checkpoint: {exc}") from exc
    if pos != len(data):
        raise CheckpointFormatError("trailing bytes after last tensor")
    return params


def save(path: str | os.PathLike, params: ParamSet) -> None:
    with open(path, "wb") as f:
        f.write(encode(params))


def load(path: str | os.PathLike) -> ParamSet:
    try:
        with open(path, "rb") as f:
            return decode(f.read())
    except FileNotFoundError as exc:
        raise CheckpointNotFound(f"checkpoint not found: {path}") from exc
