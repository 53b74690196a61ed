"""Tour of the DSP primitives: waveforms, resampling, STFT, dB, filters.

Run: python3 demos/01_dsp_basics.py
"""

import numpy as np

from afp import (
    StftConfig,
    Waveform,
    first_order_highpass,
    first_order_lowpass,
    resample,
    rms,
    stft,
    to_db,
)

rate = 44100
t = np.arange(rate) / rate
w = Waveform((0.5 * np.sin(2 * np.pi * 440 * t)).astype(np.float32), rate)
print(f"waveform: {len(w)} samples @ {w.sample_rate} Hz, rms={rms(w):.4f}")

# Downsample to the fingerprinting rate.
w11 = resample(w, 11025)
print(f"resampled: {len(w11)} samples @ {w11.sample_rate} Hz")

# STFT with the standard fingerprinting configuration: frame 512, hop 256.
cfg = StftConfig()
spec = stft(w11, cfg)
print(f"spectrogram: {spec.n_bins} bins x {spec.n_frames} frames "
      f"({spec.bin_hz:.1f} Hz/bin, {spec.hop_seconds * 1000:.1f} ms/frame)")

spec_db = to_db(spec)
peak_bin = int(np.argmax(spec_db.values[:, spec.n_frames // 2]))
print(f"dominant bin at mid-frame: {peak_bin} (~{peak_bin * spec.bin_hz:.0f} Hz), "
      f"{spec_db.values[peak_bin, spec.n_frames // 2]:.1f} dB")

# First-order filters: gain at the cutoff is -3 dB.
for name, filt in (("highpass", first_order_highpass), ("lowpass", first_order_lowpass)):
    out = filt(w, 440.0)
    ratio = rms(Waveform(out.samples[rate // 2 :], rate)) / rms(
        Waveform(w.samples[rate // 2 :], rate)
    )
    print(f"{name} at fc=440 Hz: gain {20 * np.log10(ratio):+.2f} dB (expect ~-3)")
