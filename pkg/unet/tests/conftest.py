import json
import struct
import subprocess
import sys
import wave
from pathlib import Path

import numpy as np
import pytest


def write_pcm16_wav(path, samples: np.ndarray, rate: int):
    clipped = np.clip(samples, -1.0, 1.0 - 1.0 / 32768)
    pcm = (clipped * 32768).astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(rate)
        fh.writeframes(pcm.tobytes())


def toy_melody(seed: int, seconds: float = 3.0, rate: int = 44100) -> np.ndarray:
    """Random tone sequence; enough structure for denoising to have signal."""
    rng = np.random.default_rng(seed)
    n = int(seconds * rate)
    out = np.zeros(n)
    pos = 0
    while pos < n:
        length = min(int(rng.uniform(0.15, 0.35) * rate), n - pos)
        if length < 256:
            break
        t = np.arange(length) / rate
        f0 = np.exp(rng.uniform(np.log(120), np.log(1200)))
        tone = sum(np.sin(2 * np.pi * f0 * h * t + rng.uniform(0, 6.28)) / h for h in (1, 2, 3))
        out[pos : pos + length] += np.sin(np.pi * np.arange(length) / length) * tone
        pos += length
    return 0.7 * out / (np.max(np.abs(out)) + 1e-9)


def toy_noise(seed: int, seconds: float = 10.0, rate: int = 44100) -> np.ndarray:
    rng = np.random.default_rng(10_000 + seed)
    n = int(seconds * rate)
    white = rng.standard_normal(n)
    spectrum = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n)
    freqs[0] = freqs[1]
    pink = np.fft.irfft(spectrum / np.sqrt(freqs), n)
    pink /= np.max(np.abs(pink)) + 1e-9
    if seed % 2:
        t = np.arange(n) / rate
        pink = 0.5 * pink + sum(0.5 / h * np.sin(2 * np.pi * 50 * h * t) for h in (1, 2, 3))
        pink /= np.max(np.abs(pink)) + 1e-9
    return 0.8 * pink


def toy_ir(seed: int, seconds: float = 0.3, rate: int = 32000) -> np.ndarray:
    rng = np.random.default_rng(20_000 + seed)
    n = int(seconds * rate)
    out = np.zeros(n)
    out[0] = 1.0
    out += 0.3 * rng.standard_normal(n) * np.exp(-np.arange(n) / (0.05 * rate))
    return out / np.max(np.abs(out))


@pytest.fixture(scope="session")
def aug_cli_dir(tmp_path_factory):
    """Clean/noisy SPEC1 pairs produced through the fingerprinting toolkit's
    augment CLI (the external interface the trainer consumes)."""
    root = tmp_path_factory.mktemp("unet_data")
    tracks = []
    for i in range(12):
        p = root / f"song{i:02d}.wav"
        write_pcm16_wav(p, toy_melody(i), 44100)
        tracks.append({"path": p.name, "track_id": i})
    (root / "tracks.json").write_text(json.dumps(tracks))
    noise = []
    for i in range(4):
        p = root / f"noise{i}.wav"
        write_pcm16_wav(p, toy_noise(i), 44100)
        noise.append({"path": p.name, "class": "scene", "split": "train"})
    (root / "noise.json").write_text(json.dumps(noise))
    irs = []
    for i in range(2):
        p = root / f"ir{i}.wav"
        write_pcm16_wav(p, toy_ir(i), 32000)
        irs.append({"path": p.name, "class": "", "split": ""})
    (root / "irs.json").write_text(json.dumps(irs))
    out_dir = root / "pairs"
    res = subprocess.run(
        [
            sys.executable, "-m", "afp", "augment",
            "--manifest", str(root / "tracks.json"),
            "--noise", str(root / "noise.json"),
            "--irs", str(root / "irs.json"),
            "--out-dir", str(out_dir),
            "--count", "2",
            "--seed", "7",
            "--spectrograms",
        ],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0, res.stderr
    return out_dir


def random_spec1(path, rng, shape):
    from unet_denoiser.spec1 import write_spec1

    mat = rng.uniform(0, 30, size=shape).astype(np.float32)
    write_spec1(path, mat)
    return mat
