import numpy as np
import pytest

from afp.augment import Bank, BankEntry
from afp.dsp import Waveform
from afp.synth import synth_ir, synth_noise, synth_track
from afp.wav import write_wav


@pytest.fixture(scope="session")
def small_tracks():
    """Ten deterministic pseudo-music tracks, 12 s at 44.1 kHz."""
    return [(i, synth_track(i, duration=12.0)) for i in range(10)]


@pytest.fixture(scope="session")
def bank_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("banks")
    noise_entries = []
    for i in range(8):
        kind = ("street", "cafe", "hum", "crowd")[i % 4]
        path = root / f"noise_{kind}_{i}.wav"
        write_wav(path, synth_noise(i, kind, duration=10.0))
        noise_entries.append(BankEntry(str(path), kind, "test"))
    ir_entries = []
    for i in range(4):
        path = root / f"ir_{i}.wav"
        write_wav(path, synth_ir(i))
        ir_entries.append(BankEntry(str(path), "", "test"))
    return root, noise_entries, ir_entries


@pytest.fixture(scope="session")
def noise_bank(bank_dir):
    return Bank(bank_dir[1])


@pytest.fixture(scope="session")
def ir_bank(bank_dir):
    return Bank(bank_dir[2])


def sine(freq: float, seconds: float = 1.0, rate: int = 44100, amp: float = 1.0) -> Waveform:
    t = np.arange(int(round(seconds * rate))) / rate
    return Waveform((amp * np.sin(2 * np.pi * freq * t)).astype(np.float32), rate)
