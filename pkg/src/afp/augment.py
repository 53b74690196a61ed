"""Realistic music degradation pipeline.

Four layers applied in a fixed order — loudspeaker, room response, background
noise, recording device — each with stochastic parameters drawn from
configurable ranges.  Every run is fully described by an
:class:`AugmentRecord`, and replaying a record reproduces the output exactly.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, asdict, field, replace

import numpy as np

from .dsp import (
    Waveform,
    convolve,
    first_order_highpass,
    first_order_lowpass,
    resample,
    rms,
)
from .wav import read_wav

SOURCE_RATE = 44100
PEAK_CEILING = 0.999


@dataclass(frozen=True)
class AugmentConfig:
    """Parameter ranges for the stochastic degradation recipe."""

    snr_db_range: tuple[float, float] = (-10.0, 10.0)
    gain_db_range: tuple[float, float] = (-5.0, 5.0)
    gain_probability: float = 0.3
    clip_fraction_range: tuple[float, float] = (0.0, 0.01)
    mic_lowpass_hz_range: tuple[float, float] = (3500.0, 7000.0)
    mic_highpass_hz_range: tuple[float, float] = (30.0, 150.0)
    speaker_highpass_hz_range: tuple[float, float] = (20.0, 150.0)

    def __post_init__(self):
        for name in (
            "snr_db_range",
            "gain_db_range",
            "clip_fraction_range",
            "mic_lowpass_hz_range",
            "mic_highpass_hz_range",
            "speaker_highpass_hz_range",
        ):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name}: min {lo} > max {hi}")
        if not 0.0 <= self.gain_probability <= 1.0:
            raise ValueError(f"gain_probability must be in [0,1], got {self.gain_probability}")
        lo, hi = self.clip_fraction_range
        if lo < 0.0 or hi > 1.0:
            raise ValueError(f"clip_fraction_range must lie in [0,1], got [{lo},{hi}]")


@dataclass(frozen=True)
class BankEntry:
    path: str
    label: str = ""
    split: str = ""


class Bank:
    """An on-disk collection of WAV files (background noise or impulse responses).

    Audio is loaded lazily and cached per (entry, rate).
    """

    def __init__(self, entries: list[BankEntry]):
        if not entries:
            raise ValueError("bank must contain at least one entry")
        self.entries = list(entries)
        self._cache: dict[tuple[int, int], Waveform] = {}

    def __len__(self) -> int:
        return len(self.entries)

    @classmethod
    def from_manifest(cls, path: str | os.PathLike) -> "Bank":
        """Load a JSON manifest: a list of {"path", "class", "split"} objects.

        Relative audio paths are resolved against the manifest location.
        """
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        if not isinstance(raw, list):
            raise ValueError(f"bank manifest {path} must be a JSON list")
        base = os.path.dirname(os.path.abspath(os.fspath(path)))
        entries = []
        for item in raw:
            p = item["path"]
            if not os.path.isabs(p):
                p = os.path.join(base, p)
            entries.append(BankEntry(p, item.get("class", ""), item.get("split", "")))
        missing = [e.path for e in entries if not os.path.exists(e.path)]
        if missing:
            raise FileNotFoundError(f"bank manifest {path} references missing files: {missing}")
        return cls(entries)

    def load(self, index: int, target_rate: int | None = None) -> Waveform:
        """Load entry ``index``, optionally resampled to ``target_rate``."""
        key = (index, target_rate or 0)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        entry = self.entries[index]
        try:
            w = read_wav(entry.path)
        except OSError as exc:
            raise OSError(f"cannot load bank entry {entry.path}: {exc}") from exc
        if target_rate is not None and w.sample_rate != target_rate:
            w = resample(w, target_rate)
        self._cache[key] = w
        return w


def balanced_subset(entries: list[BankEntry], per_class: int, seed: int = 0) -> list[BankEntry]:
    """Pick ``per_class`` entries from each class label, seeded."""
    rng = np.random.default_rng(np.random.SeedSequence([0xBA7A, seed]))
    by_class: dict[str, list[BankEntry]] = {}
    for e in entries:
        by_class.setdefault(e.label, []).append(e)
    out: list[BankEntry] = []
    for label in sorted(by_class):
        pool = by_class[label]
        if len(pool) < per_class:
            raise ValueError(f"class {label!r} has only {len(pool)} entries, need {per_class}")
        idx = rng.choice(len(pool), size=per_class, replace=False)
        out.extend(pool[i] for i in sorted(idx))
    return out


@dataclass(frozen=True)
class AugmentRecord:
    """Exact parameters drawn for one augmentation; replayable."""

    seed: int
    noise_id: int
    ir_id: int
    snr_db: float
    gain_db: float | None
    clip_fraction: float
    lp_hz: float
    hp_hz: float
    speaker_hp_hz: float
    noise_offset: int = 0
    rescale: float = 1.0

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "AugmentRecord":
        return cls(**json.loads(text))


def mix_at_snr(clean: Waveform, noise: Waveform, snr_db: float) -> Waveform:
    """Add ``noise`` to ``clean`` scaled to hit the requested SNR."""
    if clean.sample_rate != noise.sample_rate:
        raise ValueError(f"sample rate mismatch: {clean.sample_rate} vs {noise.sample_rate}")
    if len(clean) != len(noise):
        raise ValueError(f"length mismatch: {len(clean)} vs {len(noise)}")
    r_clean, r_noise = rms(clean), rms(noise)
    if r_clean == 0.0:
        raise ValueError("clean signal is silent")
    if r_noise == 0.0:
        raise ValueError("noise signal is silent")
    a = (r_clean / r_noise) * 10.0 ** (-snr_db / 20.0)
    mixed = clean.samples.astype(np.float64) + a * noise.samples.astype(np.float64)
    return Waveform(mixed.astype(np.float32), clean.sample_rate)


def clip_fraction(w: Waveform, fraction: float) -> Waveform:
    """Clamp the loudest ``fraction`` of samples to the magnitude quantile threshold."""
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction must be in [0,1], got {fraction}")
    if len(w) == 0 or fraction == 0.0:
        return w
    magnitudes = np.abs(w.samples)
    threshold = float(np.quantile(magnitudes, 1.0 - fraction, method="lower"))
    clipped = np.clip(w.samples, -threshold, threshold)
    return Waveform(clipped, w.sample_rate)


def apply_gain(w: Waveform, gain_db: float) -> Waveform:
    """Scale samples by 10^(gain_db/20); no clamping."""
    if not np.isfinite(gain_db):
        raise ValueError(f"gain must be finite, got {gain_db}")
    factor = 10.0 ** (gain_db / 20.0)
    return Waveform((w.samples * np.float32(factor)), w.sample_rate)


def _crop_noise(noise: Waveform, length: int, offset: int) -> Waveform:
    """Crop ``length`` samples starting at ``offset``, wrapping if the noise
    is shorter than the requested length."""
    n = len(noise)
    if n >= length:
        segment = noise.samples[offset : offset + length]
    else:
        idx = (offset + np.arange(length)) % n
        segment = noise.samples[idx]
    return Waveform(segment, noise.sample_rate)


def _draw_params(
    cfg: AugmentConfig, noise_bank: Bank, ir_bank: Bank, seed: int
) -> tuple[AugmentRecord, np.random.Generator]:
    """Draw every stochastic parameter in a fixed order.

    The noise crop offset depends on file lengths so it is drawn later from
    the same generator; the returned record carries offset 0 until then.
    """
    rng = np.random.default_rng(np.random.SeedSequence([0xAF9, seed & 0xFFFFFFFFFFFFFFFF]))
    speaker_hp = rng.uniform(*cfg.speaker_highpass_hz_range)
    ir_id = int(rng.integers(0, len(ir_bank)))
    noise_id = int(rng.integers(0, len(noise_bank)))
    snr_db = rng.uniform(*cfg.snr_db_range)
    gain_drawn = rng.uniform(*cfg.gain_db_range)
    gain_db = float(gain_drawn) if rng.random() < cfg.gain_probability else None
    clip_frac = rng.uniform(*cfg.clip_fraction_range)
    lp_hz = rng.uniform(*cfg.mic_lowpass_hz_range)
    hp_hz = rng.uniform(*cfg.mic_highpass_hz_range)
    record = AugmentRecord(
        seed=seed,
        noise_id=noise_id,
        ir_id=ir_id,
        snr_db=float(snr_db),
        gain_db=gain_db,
        clip_fraction=float(clip_frac),
        lp_hz=float(lp_hz),
        hp_hz=float(hp_hz),
        speaker_hp_hz=float(speaker_hp),
    )
    return record, rng


def _apply_record(
    clean: Waveform, record: AugmentRecord, noise_bank: Bank, ir_bank: Bank
) -> Waveform:
    """Run the four degradation layers with fully pinned parameters."""
    # 1. loudspeaker
    out = first_order_highpass(clean, record.speaker_hp_hz)
    # 2. room response
    ir = ir_bank.load(record.ir_id, target_rate=clean.sample_rate)
    out = convolve(out, ir)
    # 3. background noise
    noise = noise_bank.load(record.noise_id, target_rate=clean.sample_rate)
    segment = _crop_noise(noise, len(out), record.noise_offset)
    out = mix_at_snr(out, segment, record.snr_db)
    # 4. recording device: gain -> clipping -> lowpass -> highpass
    if record.gain_db is not None:
        out = apply_gain(out, record.gain_db)
    out = clip_fraction(out, record.clip_fraction)
    out = first_order_lowpass(out, record.lp_hz)
    out = first_order_highpass(out, record.hp_hz)
    if record.rescale != 1.0:
        out = Waveform(out.samples * np.float32(record.rescale), out.sample_rate)
    return out


def augment_one(
    clean: Waveform,
    cfg: AugmentConfig,
    noise_bank: Bank,
    ir_bank: Bank,
    seed: int,
) -> tuple[Waveform, AugmentRecord]:
    """Degrade ``clean`` through all four layers; deterministic given the seed.

    Returns the degraded waveform and the record that reproduces it via
    :func:`replay_record`.
    """
    if clean.sample_rate != SOURCE_RATE:
        raise ValueError(f"augment_one expects {SOURCE_RATE} Hz input, got {clean.sample_rate}")
    if len(clean) == 0:
        raise ValueError("clean input is empty")
    record, rng = _draw_params(cfg, noise_bank, ir_bank, seed)
    noise = noise_bank.load(record.noise_id, target_rate=clean.sample_rate)
    if len(noise) >= len(clean):
        max_offset = len(noise) - len(clean)  # plain crop
    else:
        max_offset = len(noise) - 1  # looped crop: any phase
    offset = int(rng.integers(0, max_offset + 1)) if max_offset > 0 else 0
    record = replace(record, noise_offset=offset)
    out = _apply_record(clean, record, noise_bank, ir_bank)
    peak = float(np.max(np.abs(out.samples))) if len(out) else 0.0
    if peak > 1.0:
        record = replace(record, rescale=PEAK_CEILING / peak)
        out = Waveform(out.samples * np.float32(record.rescale), out.sample_rate)
    return out, record


def replay_record(
    clean: Waveform, record: AugmentRecord, noise_bank: Bank, ir_bank: Bank
) -> Waveform:
    """Reproduce an augmentation exactly from its record (no RNG involved)."""
    return _apply_record(clean, record, noise_bank, ir_bank)


def derive_item_seed(master_seed: int, index: int) -> int:
    """Per-item 64-bit seed; order-independent, so batches can fan out."""
    ss = np.random.SeedSequence([master_seed & 0xFFFFFFFFFFFFFFFF, index])
    return int(ss.generate_state(1, np.uint64)[0])
