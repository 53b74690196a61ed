"""SPEC1: the flat binary format for linear magnitude spectrograms.

Layout: magic "SPEC1", u32 LE n_bins, u32 LE n_frames, then n_bins*n_frames
f32 LE values in row-major (bin-major) order.  This is the contract shared
with external denoiser subprocesses.
"""

from __future__ import annotations

import os
import struct

import numpy as np

MAGIC = b"SPEC1"
_HEADER = struct.Struct("<II")


def write_spec1(path: str | os.PathLike, values: np.ndarray) -> None:
    """Write a [bins x frames] float32 matrix."""
    values = np.asarray(values, dtype=np.float32)
    if values.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={values.ndim}")
    n_bins, n_frames = values.shape
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_HEADER.pack(n_bins, n_frames))
        fh.write(np.ascontiguousarray(values, dtype="<f4").tobytes())


def read_spec1(path: str | os.PathLike) -> np.ndarray:
    """Read a SPEC1 file back into a float32 [bins x frames] matrix."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < len(MAGIC) + _HEADER.size:
        raise ValueError(f"{path}: too short for a SPEC1 header ({len(data)} bytes)")
    if data[: len(MAGIC)] != MAGIC:
        raise ValueError(f"{path}: bad magic {data[:len(MAGIC)]!r}")
    n_bins, n_frames = _HEADER.unpack_from(data, len(MAGIC))
    body = data[len(MAGIC) + _HEADER.size :]
    expected = 4 * n_bins * n_frames
    if len(body) != expected:
        raise ValueError(
            f"{path}: payload is {len(body)} bytes, expected {expected} "
            f"for {n_bins}x{n_frames}"
        )
    return np.frombuffer(body, dtype="<f4").reshape(n_bins, n_frames).astype(np.float32)
