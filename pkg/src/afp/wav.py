"""WAV file reading and writing.

Supports little-endian RIFF with 16-bit PCM or 32-bit float payloads only;
anything else is rejected with a clear error.  Multichannel files are
downmixed to mono by channel average.
"""

from __future__ import annotations

import os

import numpy as np
from scipy.io import wavfile

from .dsp import Waveform

_INT16_SCALE = 32768.0


def read_wav(path: str | os.PathLike) -> Waveform:
    """Read a WAV file into a mono float32 Waveform."""
    try:
        rate, data = wavfile.read(os.fspath(path))
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise OSError(f"cannot read WAV file {path}: {exc}") from exc
    if data.dtype == np.int16:
        samples = data.astype(np.float32) / _INT16_SCALE
    elif data.dtype == np.float32:
        samples = data
    else:
        raise OSError(
            f"unsupported WAV encoding in {path}: {data.dtype} "
            "(only 16-bit PCM and 32-bit float are accepted)"
        )
    return Waveform(samples, int(rate))


def write_wav(path: str | os.PathLike, w: Waveform, encoding: str = "float32") -> None:
    """Write a Waveform as 32-bit float ("float32") or 16-bit PCM ("pcm16")."""
    if encoding == "float32":
        data = np.ascontiguousarray(w.samples, dtype=np.float32)
    elif encoding == "pcm16":
        clipped = np.clip(w.samples, -1.0, 1.0 - 1.0 / _INT16_SCALE)
        data = (clipped * _INT16_SCALE).astype(np.int16)
    else:
        raise ValueError(f"unknown encoding {encoding!r} (use 'float32' or 'pcm16')")
    wavfile.write(os.fspath(path), w.sample_rate, data)
