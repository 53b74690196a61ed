"""Time-domain and time-frequency primitives.

Everything here is a pure function over immutable inputs: resampling, STFT,
dB conversion, first-order filters, convolution, and RMS.  Waveforms are
mono float32 with a nominal [-1, 1] range.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import signal

DB_EPS = 1e-10
DEFAULT_FLOOR_DB = -80.0


@dataclass(frozen=True)
class Waveform:
    """Mono sample sequence plus its sample rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        samples = np.asarray(self.samples, dtype=np.float32)
        if samples.ndim == 2:
            # Multichannel input is downmixed by channel average up front.
            samples = samples.mean(axis=1, dtype=np.float64).astype(np.float32)
        elif samples.ndim != 1:
            raise ValueError(f"samples must be 1-D (or 2-D multichannel), got ndim={samples.ndim}")
        if samples.size and not np.isfinite(samples).all():
            raise ValueError("samples contain NaN or Inf")
        if samples is self.samples:
            samples = samples.copy()
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class StftConfig:
    """Analysis parameters for the fingerprinting front-end."""

    frame_size: int = 512
    hop_size: int = 256
    window: str = "hann"
    target_rate: int = 11025

    def __post_init__(self):
        if self.frame_size <= 0 or self.frame_size & (self.frame_size - 1):
            raise ValueError(f"frame_size must be a power of two, got {self.frame_size}")
        if not 0 < self.hop_size <= self.frame_size:
            raise ValueError(f"need 0 < hop_size <= frame_size, got hop={self.hop_size}")
        if self.target_rate <= 0:
            raise ValueError(f"target_rate must be positive, got {self.target_rate}")
        if self.window != "hann":
            raise ValueError(f"unknown window {self.window!r}")

    @property
    def n_bins(self) -> int:
        return self.frame_size // 2 + 1


@dataclass(frozen=True)
class Spectrogram:
    """bins x frames magnitude matrix with STFT provenance.

    ``scale`` is "linear" (non-negative magnitudes) or "db".
    """

    values: np.ndarray
    scale: str
    bin_hz: float
    hop_seconds: float
    floor_db: float = field(default=DEFAULT_FLOOR_DB)

    def __post_init__(self):
        if self.scale not in ("linear", "db"):
            raise ValueError(f"scale must be 'linear' or 'db', got {self.scale!r}")
        values = np.asarray(self.values, dtype=np.float32)
        if values.ndim != 2:
            raise ValueError(f"values must be 2-D [bins x frames], got ndim={values.ndim}")
        if values is self.values:
            values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def n_bins(self) -> int:
        return self.values.shape[0]

    @property
    def n_frames(self) -> int:
        return self.values.shape[1]


def resample(w: Waveform, target_rate: int) -> Waveform:
    """Resample to ``target_rate`` with a polyphase windowed-sinc filter.

    Output length is round(len * target/input) within one sample, and the
    result is band-limited below the target Nyquist.
    """
    if target_rate <= 0:
        raise ValueError(f"target_rate must be positive, got {target_rate}")
    if target_rate == w.sample_rate:
        return w
    g = np.gcd(w.sample_rate, target_rate)
    up, down = target_rate // g, w.sample_rate // g
    out = signal.resample_poly(w.samples.astype(np.float64), up, down)
    return Waveform(out.astype(np.float32), target_rate)


def stft(w: Waveform, cfg: StftConfig = StftConfig()) -> Spectrogram:
    """Linear magnitude STFT with a periodic Hann window and no padding.

    Frame count is floor((len - frame_size)/hop_size) + 1.
    """
    n, frame, hop = len(w), cfg.frame_size, cfg.hop_size
    if n < frame:
        raise ValueError(f"input too short for STFT: {n} samples < frame_size {frame}")
    window = signal.get_window("hann", frame, fftbins=True)
    frames = np.lib.stride_tricks.sliding_window_view(w.samples, frame)[::hop]
    mag = np.abs(np.fft.rfft(frames * window, axis=1)).T.astype(np.float32)
    return Spectrogram(
        values=mag,
        scale="linear",
        bin_hz=w.sample_rate / frame,
        hop_seconds=hop / w.sample_rate,
    )


def to_db(s: Spectrogram, floor_db: float = DEFAULT_FLOOR_DB) -> Spectrogram:
    """Convert a linear magnitude spectrogram to dB re 1.0, clamped at ``floor_db``."""
    if s.scale != "linear":
        raise ValueError("to_db expects a linear-scale spectrogram")
    db = 20.0 * np.log10(s.values.astype(np.float64) + DB_EPS)
    db = np.maximum(db, floor_db).astype(np.float32)
    return Spectrogram(db, "db", s.bin_hz, s.hop_seconds, floor_db=floor_db)


def _check_cutoff(fc: float, sample_rate: int):
    if not 0 < fc < sample_rate / 2:
        raise ValueError(f"cutoff {fc} Hz outside (0, {sample_rate / 2}) for rate {sample_rate}")


def first_order_highpass(w: Waveform, fc: float) -> Waveform:
    """Single-pole highpass (bilinear transform); -3 dB at ``fc``."""
    _check_cutoff(fc, w.sample_rate)
    b, a = signal.butter(1, fc, btype="highpass", fs=w.sample_rate)
    return Waveform(signal.lfilter(b, a, w.samples.astype(np.float64)).astype(np.float32), w.sample_rate)


def first_order_lowpass(w: Waveform, fc: float) -> Waveform:
    """Single-pole lowpass (bilinear transform); -3 dB at ``fc``."""
    _check_cutoff(fc, w.sample_rate)
    b, a = signal.butter(1, fc, btype="lowpass", fs=w.sample_rate)
    return Waveform(signal.lfilter(b, a, w.samples.astype(np.float64)).astype(np.float32), w.sample_rate)


def convolve(w: Waveform, ir: Waveform) -> Waveform:
    """Linear convolution with ``ir``, truncated to len(w) and peak-normalized.

    The output is rescaled so max|out| = max|in|, which keeps levels
    comparable before/after applying a room response.  Sample rates must
    already match (resample the IR first).
    """
    if len(ir) == 0 or not np.any(ir.samples):
        raise ValueError("impulse response is empty or all zeros")
    if ir.sample_rate != w.sample_rate:
        raise ValueError(f"sample rate mismatch: {w.sample_rate} vs IR {ir.sample_rate}")
    out = signal.fftconvolve(w.samples.astype(np.float64), ir.samples.astype(np.float64))[: len(w)]
    peak_in = np.max(np.abs(w.samples)) if len(w) else 0.0
    peak_out = np.max(np.abs(out)) if len(out) else 0.0
    if peak_in > 0 and peak_out > 0:
        out *= peak_in / peak_out
    return Waveform(out.astype(np.float32), w.sample_rate)


def rms(w: Waveform) -> float:
    """Root-mean-square level of the waveform."""
    if len(w) == 0:
        raise ValueError("rms of empty waveform")
    return float(np.sqrt(np.mean(np.square(w.samples, dtype=np.float64))))
