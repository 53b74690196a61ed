import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from afp.augment import (
    AugmentConfig,
    AugmentRecord,
    Bank,
    BankEntry,
    _draw_params,
    apply_gain,
    augment_one,
    balanced_subset,
    clip_fraction,
    derive_item_seed,
    mix_at_snr,
    replay_record,
)
from afp.dsp import Waveform, rms
from afp.synth import synth_track

from conftest import sine


def measured_snr_db(clean: Waveform, mixed: Waveform) -> float:
    noise_part = Waveform(mixed.samples - clean.samples, clean.sample_rate)
    return 20.0 * np.log10(rms(clean) / rms(noise_part))


class TestMixAtSnr:
    def test_equal_power_zero_snr(self):
        # reversed signal has identical rms, so the scale is exactly 1
        rng = np.random.default_rng(0)
        clean = Waveform(rng.normal(0, 0.1, 44100).astype(np.float32), 44100)
        noise = Waveform(clean.samples[::-1].copy(), 44100)
        out = mix_at_snr(clean, noise, 0.0)
        assert np.allclose(out.samples, clean.samples + noise.samples, atol=1e-7)

    def test_unequal_power_scale_formula(self):
        rng = np.random.default_rng(1)
        clean = Waveform(rng.normal(0, 0.1, 44100).astype(np.float32), 44100)
        noise = Waveform(rng.normal(0, 0.03, 44100).astype(np.float32), 44100)
        out = mix_at_snr(clean, noise, 0.0)
        expected = clean.samples + (rms(clean) / rms(noise)) * noise.samples
        assert np.allclose(out.samples, expected, atol=1e-6)

    def test_closed_form_scale(self):
        # rms(clean)=0.5, rms(noise)=0.25, snr=6.0206 dB -> a = 2 * 10^(-0.30103) = 1.0
        clean = Waveform(np.full(1000, 0.5, dtype=np.float32), 44100)
        noise = Waveform(np.full(1000, 0.25, dtype=np.float32), 44100)
        out = mix_at_snr(clean, noise, 6.0206)
        a = (out.samples[0] - 0.5) / 0.25
        assert a == pytest.approx(1.0, abs=1e-4)

    def test_silent_noise_rejected(self):
        clean = sine(440, seconds=0.1)
        silent = Waveform(np.zeros(len(clean), dtype=np.float32), 44100)
        with pytest.raises(ValueError):
            mix_at_snr(clean, silent, 0.0)
        with pytest.raises(ValueError):
            mix_at_snr(silent, clean, 0.0)

    def test_measured_snr_matches_requested(self):
        rng = np.random.default_rng(7)
        for snr in (-10.0, -3.3, 0.0, 4.5, 10.0):
            clean = Waveform(rng.normal(0, 0.2, 22050).astype(np.float32), 44100)
            noise = Waveform(rng.normal(0, 0.05, 22050).astype(np.float32), 44100)
            out = mix_at_snr(clean, noise, snr)
            assert measured_snr_db(clean, out) == pytest.approx(snr, abs=0.1)


class TestClipFraction:
    def test_zero_fraction_identity(self):
        w = sine(440, seconds=0.05)
        out = clip_fraction(w, 0.0)
        assert np.array_equal(out.samples, w.samples)

    def test_full_fraction_clamps_to_min_magnitude(self):
        samples = np.array([0.1, -0.4, 0.3, -0.2], dtype=np.float32)
        out = clip_fraction(Waveform(samples, 8000), 1.0)
        assert np.allclose(np.abs(out.samples), 0.1)
        assert np.all(np.sign(out.samples) == np.sign(samples))

    def test_exact_count_from_sort_oracle(self):
        rng = np.random.default_rng(3)
        samples = rng.permutation(np.linspace(0.001, 1.0, 1000)).astype(np.float32)
        w = Waveform(samples, 44100)
        out = clip_fraction(w, 0.01)
        modified = np.count_nonzero(out.samples != w.samples)
        # sort oracle: threshold is the 990th smallest magnitude; the 10
        # larger samples get clamped
        sorted_mags = np.sort(np.abs(samples))
        threshold = sorted_mags[989]
        assert modified == np.count_nonzero(np.abs(samples) > threshold) == 10

    def test_out_of_range_fraction(self):
        w = sine(440, seconds=0.01)
        with pytest.raises(ValueError):
            clip_fraction(w, -0.1)
        with pytest.raises(ValueError):
            clip_fraction(w, 1.5)

    @given(st.integers(min_value=0, max_value=10_000), st.floats(min_value=0, max_value=1))
    @settings(max_examples=30, deadline=None)
    def test_clip_never_raises_magnitude(self, seed, fraction):
        rng = np.random.default_rng(seed)
        w = Waveform(rng.normal(0, 0.3, 500).astype(np.float32), 8000)
        out = clip_fraction(w, fraction)
        assert np.all(np.abs(out.samples) <= np.abs(w.samples) + 1e-9)


class TestApplyGain:
    def test_zero_gain_identity(self):
        w = sine(440, seconds=0.02)
        assert np.array_equal(apply_gain(w, 0.0).samples, w.samples)

    def test_doubling(self):
        w = sine(440, seconds=0.02, amp=0.25)
        out = apply_gain(w, 6.0206)
        assert np.allclose(out.samples, w.samples * 2.0, atol=1e-4)

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            apply_gain(sine(440, seconds=0.01), float("nan"))
        with pytest.raises(ValueError):
            apply_gain(sine(440, seconds=0.01), float("-inf"))


class TestAugmentOne:
    def test_deterministic(self, noise_bank, ir_bank):
        clean = synth_track(5, duration=2.0)
        a, rec_a = augment_one(clean, AugmentConfig(), noise_bank, ir_bank, seed=99)
        b, rec_b = augment_one(clean, AugmentConfig(), noise_bank, ir_bank, seed=99)
        assert np.array_equal(a.samples, b.samples)
        assert rec_a == rec_b

    def test_different_seeds_differ(self, noise_bank, ir_bank):
        clean = synth_track(5, duration=2.0)
        a, _ = augment_one(clean, AugmentConfig(), noise_bank, ir_bank, seed=1)
        b, _ = augment_one(clean, AugmentConfig(), noise_bank, ir_bank, seed=2)
        assert not np.array_equal(a.samples, b.samples)

    def test_replay_reproduces_exactly(self, noise_bank, ir_bank):
        clean = synth_track(6, duration=2.0)
        for seed in (0, 17, 123456789):
            out, record = augment_one(clean, AugmentConfig(), noise_bank, ir_bank, seed)
            replayed = replay_record(clean, record, noise_bank, ir_bank)
            assert np.array_equal(replayed.samples, out.samples)

    def test_record_json_roundtrip(self, noise_bank, ir_bank):
        clean = synth_track(6, duration=1.0)
        _, record = augment_one(clean, AugmentConfig(), noise_bank, ir_bank, 5)
        assert AugmentRecord.from_json(record.to_json()) == record

    def test_requires_source_rate(self, noise_bank, ir_bank):
        with pytest.raises(ValueError):
            augment_one(sine(440, rate=22050), AugmentConfig(), noise_bank, ir_bank, 0)

    def test_collapsed_ranges_near_passthrough(self, noise_bank, ir_bank):
        # ranges collapsed: very high SNR, no gain, no clipping, widest filters
        cfg = AugmentConfig(
            snr_db_range=(60.0, 60.0),
            gain_db_range=(0.0, 0.0),
            gain_probability=0.0,
            clip_fraction_range=(0.0, 0.0),
            mic_lowpass_hz_range=(7000.0, 7000.0),
            mic_highpass_hz_range=(30.0, 30.0),
            speaker_highpass_hz_range=(20.0, 20.0),
        )
        clean = synth_track(7, duration=2.0)
        out, record = augment_one(clean, cfg, noise_bank, ir_bank, 3)
        assert record.gain_db is None
        assert record.clip_fraction == 0.0
        # output stays close to the speaker+IR chain alone
        from afp.dsp import convolve, first_order_highpass

        chain = first_order_highpass(clean, 20.0)
        chain = convolve(chain, ir_bank.load(record.ir_id, target_rate=44100))
        from afp.dsp import first_order_lowpass

        chain = first_order_lowpass(chain, 7000.0)
        chain = first_order_highpass(chain, 30.0)
        noise_level = rms(Waveform(out.samples - chain.samples * record.rescale, 44100))
        assert noise_level < 0.01 * rms(chain)

    def test_measured_snr_matches_record(self, noise_bank, ir_bank):
        # reconstruct the pre-noise chain and check the stored SNR
        from afp.augment import _crop_noise
        from afp.dsp import convolve, first_order_highpass

        clean = synth_track(8, duration=2.0)
        cfg = AugmentConfig(
            gain_probability=0.0, clip_fraction_range=(0.0, 0.0),
            mic_lowpass_hz_range=(7000.0, 7000.0), mic_highpass_hz_range=(30.0, 30.0),
        )
        for seed in range(5):
            out, rec = augment_one(clean, cfg, noise_bank, ir_bank, seed)
            pre = first_order_highpass(clean, rec.speaker_hp_hz)
            pre = convolve(pre, ir_bank.load(rec.ir_id, target_rate=44100))
            noise = noise_bank.load(rec.noise_id, target_rate=44100)
            segment = _crop_noise(noise, len(pre), rec.noise_offset)
            mixed = mix_at_snr(pre, segment, rec.snr_db)
            assert measured_snr_db(pre, mixed) == pytest.approx(rec.snr_db, abs=0.1)

    def test_draws_inside_ranges_10k_seeds(self, noise_bank, ir_bank):
        cfg = AugmentConfig()
        gain_applied = 0
        for seed in range(10_000):
            rec, _ = _draw_params(cfg, noise_bank, ir_bank, seed)
            assert cfg.snr_db_range[0] <= rec.snr_db <= cfg.snr_db_range[1]
            assert cfg.clip_fraction_range[0] <= rec.clip_fraction <= cfg.clip_fraction_range[1]
            assert cfg.mic_lowpass_hz_range[0] <= rec.lp_hz <= cfg.mic_lowpass_hz_range[1]
            assert cfg.mic_highpass_hz_range[0] <= rec.hp_hz <= cfg.mic_highpass_hz_range[1]
            assert (
                cfg.speaker_highpass_hz_range[0]
                <= rec.speaker_hp_hz
                <= cfg.speaker_highpass_hz_range[1]
            )
            assert 0 <= rec.noise_id < len(noise_bank)
            assert 0 <= rec.ir_id < len(ir_bank)
            if rec.gain_db is not None:
                gain_applied += 1
                assert cfg.gain_db_range[0] <= rec.gain_db <= cfg.gain_db_range[1]
        # binomial(10000, 0.3): 3 sigma ~ 137
        assert abs(gain_applied - 3000) <= 140

    def test_end_to_end_records_inside_ranges(self, noise_bank, ir_bank):
        cfg = AugmentConfig()
        clean = synth_track(9, duration=0.5)
        for seed in range(50):
            _, rec = augment_one(clean, cfg, noise_bank, ir_bank, seed)
            assert cfg.snr_db_range[0] <= rec.snr_db <= cfg.snr_db_range[1]
            assert rec.noise_offset >= 0


class TestBank:
    def test_missing_files_listed(self, tmp_path):
        manifest = tmp_path / "m.json"
        manifest.write_text(json.dumps([{"path": "gone.wav", "class": "street"}]))
        with pytest.raises(FileNotFoundError, match="gone.wav"):
            Bank.from_manifest(manifest)

    def test_manifest_roundtrip(self, bank_dir, tmp_path):
        _, noise_entries, _ = bank_dir
        manifest = tmp_path / "noise.json"
        manifest.write_text(
            json.dumps([{"path": e.path, "class": e.label, "split": e.split} for e in noise_entries])
        )
        bank = Bank.from_manifest(manifest)
        assert len(bank) == len(noise_entries)
        w = bank.load(0, target_rate=44100)
        assert w.sample_rate == 44100

    def test_empty_bank_rejected(self):
        with pytest.raises(ValueError):
            Bank([])

    def test_balanced_subset(self):
        entries = [BankEntry(f"{label}_{i}.wav", label) for label in ("a", "b") for i in range(5)]
        picked = balanced_subset(entries, 3, seed=1)
        assert len(picked) == 6
        assert sum(1 for e in picked if e.label == "a") == 3

    def test_balanced_subset_insufficient(self):
        entries = [BankEntry("a0.wav", "a")]
        with pytest.raises(ValueError):
            balanced_subset(entries, 2)


class TestConfigValidation:
    def test_bad_range(self):
        with pytest.raises(ValueError):
            AugmentConfig(snr_db_range=(10.0, -10.0))

    def test_bad_probability(self):
        with pytest.raises(ValueError):
            AugmentConfig(gain_probability=1.5)

    def test_bad_clip_range(self):
        with pytest.raises(ValueError):
            AugmentConfig(clip_fraction_range=(0.0, 1.5))


def test_derive_item_seed_stable():
    a = derive_item_seed(42, 0)
    b = derive_item_seed(42, 0)
    c = derive_item_seed(42, 1)
    assert a == b
    assert a != c
    assert 0 <= a < 2**64
