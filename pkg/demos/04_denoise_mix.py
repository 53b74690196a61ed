"""Denoising front-ends and the dual-query mix strategy.

Degrades an excerpt, then identifies it four ways: raw, spectral-subtraction
denoised, through an external identity subprocess, and with the mix rule.

Run: python3 demos/04_denoise_mix.py
"""

import sys
import tempfile
from pathlib import Path

from afp import (
    DenoiserKind,
    Waveform,
    augment_one,
    AugmentConfig,
    build_index,
    denoised_match,
    match_query,
    mix_query,
)
from afp.augment import Bank, BankEntry
from afp.synth import synth_ir, synth_noise, synth_track
from afp.wav import write_wav

work = Path(tempfile.mkdtemp(prefix="afp-demo-"))
noise_entries, ir_entries = [], []
for i, kind in enumerate(("street", "cafe", "hum", "crowd")):
    p = work / f"n{i}.wav"; write_wav(p, synth_noise(i, kind)); noise_entries.append(BankEntry(str(p), kind))
for i in range(3):
    p = work / f"ir{i}.wav"; write_wav(p, synth_ir(i)); ir_entries.append(BankEntry(str(p)))
noise_bank, ir_bank = Bank(noise_entries), Bank(ir_entries)

tracks = [(i, synth_track(i, duration=12.0)) for i in range(25)]
index = build_index(tracks, profile="envelope")

tid, full = tracks[9]
clean = Waveform(full.samples[2 * 44100 : 5 * 44100], 44100)
noisy, record = augment_one(clean, AugmentConfig(), noise_bank, ir_bank, seed=11)
print(f"degraded a 3 s excerpt of track {tid} at snr {record.snr_db:+.1f} dB")

raw = match_query(index, noisy)
print(f"raw path:      track {raw.track_id}, score {raw.score}")

spectral = DenoiserKind.spectral_sub()  # alpha=2.0, beta=0.01
den = denoised_match(index, noisy, spectral)
print(f"denoised path: track {den.track_id}, score {den.score}")

mixed = mix_query(index, noisy, spectral)
print(f"mix decision:  track {mixed.track_id}, score {mixed.score} "
      f"(keeps whichever path aligned more hashes; raw wins ties)")

# Any subprocess speaking the SPEC1 format can replace the denoiser.
identity = DenoiserKind.external(
    f'{sys.executable} -c "import shutil,sys; shutil.copy(sys.argv[1], sys.argv[2])"'
)
via_external = mix_query(index, noisy, identity)
print(f"external identity denoiser: track {via_external.track_id}, "
      f"score {via_external.score} (equals raw: {via_external.score == raw.score})")

# A broken external command degrades to the raw path with a warning.
broken = DenoiserKind.external(f'{sys.executable} -c "import sys; sys.exit(1)"')
degraded = mix_query(index, noisy, broken)
print(f"broken denoiser degrades gracefully: track {degraded.track_id}, "
      f"warning={degraded.warning is not None}")
