"""Deterministic synthetic audio: tracks, background noise, impulse responses.

These generators stand in for a real music corpus, noise recordings, and
measured room responses in demos and benchmarks.  Everything is a pure
function of its seed, so corpora are reproducible byte-for-byte.
"""

from __future__ import annotations

import numpy as np

from .dsp import Waveform

# Pentatonic step pattern in semitones; each track draws its own root so
# different tracks land on different frequency bins.
_SCALE_STEPS = np.array([0, 3, 5, 7, 10])

NOISE_KINDS = ("street", "cafe", "hum", "crowd")


def synth_track(seed: int, duration: float = 12.0, sample_rate: int = 44100) -> Waveform:
    """A pseudo-random two-voice melody with harmonics; distinct per seed."""
    rng = np.random.default_rng(np.random.SeedSequence([0xA0D10, seed]))
    n = int(round(duration * sample_rate))
    out = np.zeros(n, dtype=np.float64)
    root = np.exp(rng.uniform(np.log(90.0), np.log(220.0)))
    octaves = np.array([[1.0], [2.0], [4.0]])
    scale = (root * 2.0 ** (_SCALE_STEPS / 12.0) * octaves).ravel()
    t_cursor = 0
    while t_cursor < n:
        note_len = int(rng.uniform(0.18, 0.42) * sample_rate)
        note_len = min(note_len, n - t_cursor)
        if note_len < 256:
            break
        t = np.arange(note_len) / sample_rate
        env = np.sin(np.pi * np.arange(note_len) / note_len) ** 0.7
        note = np.zeros(note_len)
        # melody voice + supporting bass voice
        for base, level in ((rng.choice(scale) * 2.0, 1.0), (rng.choice(scale[:5]), 0.5)):
            for h in range(1, 6):
                amp = level / h**1.2
                phase = rng.uniform(0, 2 * np.pi)
                note += amp * np.sin(2 * np.pi * base * h * t + phase)
        out[t_cursor : t_cursor + note_len] += env * note
        t_cursor += note_len
    peak = np.max(np.abs(out))
    if peak > 0:
        out *= 0.7 / peak
    return Waveform(out.astype(np.float32), sample_rate)


def _pink_noise(rng: np.random.Generator, n: int) -> np.ndarray:
    """Pink-ish noise via 1/sqrt(f) spectral shaping of white noise."""
    white = rng.standard_normal(n)
    spectrum = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n)
    freqs[0] = freqs[1] if n > 1 else 1.0
    spectrum /= np.sqrt(freqs)
    pink = np.fft.irfft(spectrum, n)
    return pink / (np.max(np.abs(pink)) + 1e-12)


def synth_noise(
    seed: int, kind: str = "street", duration: float = 10.0, sample_rate: int = 44100
) -> Waveform:
    """Background noise in one of a few scene-like flavors.

    "street": low-heavy rumble; "cafe": babble of tone bursts over pink noise;
    "hum": mains hum harmonics plus hiss; "crowd": amplitude-modulated broadband.
    """
    if kind not in NOISE_KINDS:
        raise ValueError(f"unknown noise kind {kind!r} (choose from {NOISE_KINDS})")
    rng = np.random.default_rng(np.random.SeedSequence([0x4015E, seed]))
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    pink = _pink_noise(rng, n)
    if kind == "street":
        lfo = 0.6 + 0.4 * np.sin(2 * np.pi * rng.uniform(0.1, 0.5) * t + rng.uniform(0, 6.28))
        out = pink * lfo
    elif kind == "cafe":
        out = 0.4 * pink
        for _ in range(int(duration * 6)):
            start = rng.integers(0, max(1, n - sample_rate // 4))
            length = int(rng.uniform(0.05, 0.25) * sample_rate)
            length = min(length, n - start)
            tt = np.arange(length) / sample_rate
            f0 = rng.uniform(150, 3000)
            burst = np.sin(2 * np.pi * f0 * tt + rng.uniform(0, 6.28))
            burst += 0.5 * np.sin(2 * np.pi * 2 * f0 * tt + rng.uniform(0, 6.28))
            out[start : start + length] += np.hanning(length) * burst * rng.uniform(0.3, 1.0)
    elif kind == "hum":
        out = 0.3 * pink
        for h in (1, 2, 3, 4):
            out += (0.8 / h) * np.sin(2 * np.pi * 50.0 * h * t + rng.uniform(0, 6.28))
    else:  # crowd
        mod = np.abs(_pink_noise(rng, n))
        out = pink * (0.3 + 0.7 * mod)
    peak = np.max(np.abs(out))
    if peak > 0:
        out = out * (0.8 / peak)
    return Waveform(out.astype(np.float32), sample_rate)


def synth_ir(seed: int, duration: float = 0.35, sample_rate: int = 32000) -> Waveform:
    """Synthetic room impulse response: direct path, early reflections,
    exponentially decaying diffuse tail."""
    rng = np.random.default_rng(np.random.SeedSequence([0x1B, seed]))
    n = int(round(duration * sample_rate))
    out = np.zeros(n, dtype=np.float64)
    out[0] = 1.0
    for _ in range(rng.integers(3, 8)):
        pos = rng.integers(int(0.002 * sample_rate), int(0.05 * sample_rate))
        out[pos] += rng.uniform(0.2, 0.6) * rng.choice((-1.0, 1.0))
    decay = np.exp(-np.arange(n) / (rng.uniform(0.03, 0.12) * sample_rate))
    out += 0.35 * rng.standard_normal(n) * decay
    return Waveform((out / np.max(np.abs(out))).astype(np.float32), sample_rate)
