"""The SPEC1 spectrogram file format (the contract shared with the
fingerprinting toolkit): magic "SPEC1", u32 LE bins, u32 LE frames, then
bins*frames float32 LE values in bin-major order."""

from __future__ import annotations

import os
import struct

import numpy as np

MAGIC = b"SPEC1"
_HEADER = struct.Struct("<II")


def write_spec1(path: str | os.PathLike, values: np.ndarray) -> None:
    values = np.asarray(values, dtype=np.float32)
    if values.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={values.ndim}")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_HEADER.pack(*values.shape))
        fh.write(np.ascontiguousarray(values, dtype="<f4").tobytes())


def read_spec1_shape(path: str | os.PathLike) -> tuple[int, int]:
    """Read just the header; cheap pair-shape validation."""
    with open(path, "rb") as fh:
        head = fh.read(len(MAGIC) + _HEADER.size)
    if len(head) < len(MAGIC) + _HEADER.size or head[: len(MAGIC)] != MAGIC:
        raise ValueError(f"{path}: not a SPEC1 file")
    return _HEADER.unpack_from(head, len(MAGIC))


def read_spec1(path: str | os.PathLike) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < len(MAGIC) + _HEADER.size:
        raise ValueError(f"{path}: too short for a SPEC1 header")
    if data[: len(MAGIC)] != MAGIC:
        raise ValueError(f"{path}: bad magic {data[:len(MAGIC)]!r}")
    n_bins, n_frames = _HEADER.unpack_from(data, len(MAGIC))
    body = data[len(MAGIC) + _HEADER.size :]
    if len(body) != 4 * n_bins * n_frames:
        raise ValueError(
            f"{path}: payload is {len(body)} bytes, expected {4 * n_bins * n_frames}"
        )
    return np.frombuffer(body, dtype="<f4").reshape(n_bins, n_frames).astype(np.float32)
