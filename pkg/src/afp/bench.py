"""Benchmark orchestration: clean/noisy/denoised/mix identification grids
plus denoising quality aggregates, emitted as a reproducible JSON report."""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .augment import AugmentConfig, Bank, augment_one
from .denoise import DenoiserKind, combine_mix, denoise_spectrogram
from .dsp import Spectrogram, Waveform, resample, stft, to_db
from .fingerprint import (
    DEFAULT_MIN_SCORE,
    FingerprintIndex,
    MatchResult,
    match_spectrogram,
)
from .metrics import l1_distance, peak_prf, psnr
from .peaks import extract_peaks
from .wav import read_wav

CONDITIONS = ("clean", "noisy", "denoised", "mix")
SOURCE_RATE = 44100


@dataclass(frozen=True)
class BenchConfig:
    lengths_s: tuple[float, ...] = (3.0, 5.0, 10.0)
    conditions: tuple[str, ...] = CONDITIONS
    seed: int = 0
    min_score: int = DEFAULT_MIN_SCORE
    prf_tol_t: int = 0
    prf_tol_f: int = 0

    def __post_init__(self):
        for c in self.conditions:
            if c not in CONDITIONS:
                raise ValueError(f"unknown condition {c!r} (choose from {CONDITIONS})")
        if not self.lengths_s or any(l <= 0 for l in self.lengths_s):
            raise ValueError("lengths_s must be positive")


def load_query_manifest(path: str | os.PathLike) -> list[tuple[str, int]]:
    """JSON list of {"path", "track_id"}; relative paths resolve against the
    manifest location.  Missing files raise before any work starts."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, list):
        raise ValueError(f"query manifest {path} must be a JSON list")
    base = os.path.dirname(os.path.abspath(os.fspath(path)))
    out = []
    for item in raw:
        p = item["path"]
        if not os.path.isabs(p):
            p = os.path.join(base, p)
        out.append((p, int(item["track_id"])))
    missing = [p for p, _ in out if not os.path.exists(p)]
    if missing:
        raise FileNotFoundError(f"query manifest {path} references missing files: {missing}")
    return out


def _outcome(res: MatchResult, expected: int) -> str:
    if not res.matched:
        return "nomatch"
    return "hit" if res.track_id == expected else "wrong"


def run_benchmark(
    index: FingerprintIndex,
    queries: list[tuple[str, int]],
    noise_bank: Bank | None = None,
    ir_bank: Bank | None = None,
    aug_cfg: AugmentConfig = AugmentConfig(),
    denoiser: DenoiserKind = DenoiserKind.spectral_sub(),
    cfg: BenchConfig = BenchConfig(),
    threads: int = 1,
) -> dict:
    """Snippet-level identification benchmark over a query manifest.

    For each track and snippet length, one snippet is cut at a seeded random
    offset, degraded through the augmentation pipeline, and identified under
    every requested condition.  The returned dict serializes to byte-stable
    JSON for a fixed seed.
    """
    needs_noise = any(c != "clean" for c in cfg.conditions)
    needs_denoise = any(c in ("denoised", "mix") for c in cfg.conditions)
    if needs_noise and (noise_bank is None or ir_bank is None):
        raise ValueError("noisy conditions need both a noise bank and an IR bank")
    if needs_denoise and denoiser.kind == "none":
        raise ValueError("denoised/mix conditions need a denoiser")
    missing = [p for p, _ in queries if not os.path.exists(p)]
    if missing:
        raise FileNotFoundError(f"missing query audio: {missing}")

    stft_cfg = index.stft_config
    profile = index.peak_profile

    def one(task: tuple[int, float]) -> tuple[tuple[int, float], dict | None]:
        track_idx, length_s = task
        path, expected = queries[track_idx]
        w = read_wav(path)
        if w.sample_rate != SOURCE_RATE:
            w = resample(w, SOURCE_RATE)
        snippet_len = int(round(length_s * SOURCE_RATE))
        if len(w) < snippet_len:
            return task, None
        rng = np.random.default_rng(
            np.random.SeedSequence([cfg.seed, track_idx, int(round(length_s * 1000))])
        )
        offset = int(rng.integers(0, len(w) - snippet_len + 1))
        clean = Waveform(w.samples[offset : offset + snippet_len], SOURCE_RATE)
        result: dict = {"offset": offset}

        def spec_of(wave: Waveform) -> Spectrogram:
            return stft(resample(wave, stft_cfg.target_rate), stft_cfg)

        s_clean = spec_of(clean)
        db_clean = to_db(s_clean)
        if "clean" in cfg.conditions:
            result["clean"] = _outcome(match_spectrogram(index, db_clean, cfg.min_score), expected)
        if needs_noise:
            aug_seed = int(rng.integers(0, 2**63))
            noisy, _ = augment_one(clean, aug_cfg, noise_bank, ir_bank, aug_seed)
            s_noisy = spec_of(noisy)
            db_noisy = to_db(s_noisy)
            noisy_res = match_spectrogram(index, db_noisy, cfg.min_score)
            peaks_clean = extract_peaks(db_clean, profile)

            def quality(s_test: Spectrogram, db_test: Spectrogram) -> dict:
                prf = peak_prf(
                    peaks_clean, extract_peaks(db_test, profile), cfg.prf_tol_t, cfg.prf_tol_f
                )
                return {
                    "l1": l1_distance(s_clean, s_test),
                    "psnr": psnr(s_clean, s_test),
                    "precision": prf.precision,
                    "recall": prf.recall,
                    "f1": prf.f1,
                }

            if "noisy" in cfg.conditions:
                result["noisy"] = _outcome(noisy_res, expected)
                result["noisy_stats"] = quality(s_noisy, db_noisy)
            if needs_denoise:
                s_den = denoise_spectrogram(s_noisy, denoiser)
                db_den = to_db(s_den)
                den_res = match_spectrogram(index, db_den, cfg.min_score)
                if "denoised" in cfg.conditions:
                    result["denoised"] = _outcome(den_res, expected)
                    result["denoised_stats"] = quality(s_den, db_den)
                if "mix" in cfg.conditions:
                    result["mix"] = _outcome(combine_mix(noisy_res, den_res), expected)
        return task, result

    tasks = [(i, l) for i in range(len(queries)) for l in cfg.lengths_s]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            raw_results = dict(pool.map(one, tasks))
    else:
        raw_results = dict(one(t) for t in tasks)

    id_grid: dict[str, dict[str, dict[str, int]]] = {}
    skipped: dict[str, int] = {}
    stats_sums: dict[str, dict[str, float]] = {}
    stats_n: dict[str, int] = {}
    for task in sorted(raw_results, key=lambda t: (t[1], t[0])):
        length_key = f"{task[1]:g}"
        res = raw_results[task]
        if res is None:
            skipped[length_key] = skipped.get(length_key, 0) + 1
            continue
        for cond in cfg.conditions:
            cell = id_grid.setdefault(length_key, {}).setdefault(
                cond, {"hit": 0, "wrong": 0, "nomatch": 0}
            )
            cell[res[cond]] += 1
        for stats_key in ("noisy_stats", "denoised_stats"):
            if stats_key in res:
                sums = stats_sums.setdefault(
                    stats_key, {"l1": 0.0, "psnr": 0.0, "precision": 0.0, "recall": 0.0, "f1": 0.0}
                )
                for k in sums:
                    sums[k] += res[stats_key][k]
                stats_n[stats_key] = stats_n.get(stats_key, 0) + 1

    id_rates: dict[str, dict[str, dict]] = {}
    for length_key, conds in id_grid.items():
        id_rates[length_key] = {}
        for cond, cell in conds.items():
            n = cell["hit"] + cell["wrong"] + cell["nomatch"]
            id_rates[length_key][cond] = {
                **cell,
                "n": n,
                "rate": 100.0 * cell["hit"] / n if n else 0.0,
            }

    denoising: dict[str, dict] = {}
    for stats_key, label in (("noisy_stats", "noisy"), ("denoised_stats", "denoised")):
        if stats_key in stats_sums:
            n = stats_n[stats_key]
            denoising[label] = {
                "n": n,
                **{f"{k}_mean": v / n for k, v in stats_sums[stats_key].items()},
            }

    run_info = {
        "seed": cfg.seed,
        "lengths_s": list(cfg.lengths_s),
        "conditions": list(cfg.conditions),
        "min_score": cfg.min_score,
        "prf_tolerance": [cfg.prf_tol_t, cfg.prf_tol_f],
        "peak_profile": profile,
        "stft": {
            "frame_size": stft_cfg.frame_size,
            "hop_size": stft_cfg.hop_size,
            "window": stft_cfg.window,
            "target_rate": stft_cfg.target_rate,
        },
        "denoiser": _denoiser_label(denoiser) if needs_denoise else None,
        "n_tracks_indexed": len(index.track_table),
        "n_queries": len(queries),
        "skipped": skipped,
    }
    run_info["config_digest"] = hashlib.sha256(
        json.dumps(run_info, sort_keys=True).encode("utf-8")
    ).hexdigest()
    report = {"run": run_info, "id_rates": id_rates}
    if denoising:
        report["denoising"] = denoising
    return report


def _denoiser_label(denoiser: DenoiserKind) -> str:
    if denoiser.kind == "spectral_sub":
        return f"spectral_sub(alpha={denoiser.alpha:g},beta={denoiser.beta:g})"
    if denoiser.kind == "external":
        return "external:" + " ".join(denoiser.command)
    return "none"


def report_json(report: dict) -> str:
    """Canonical JSON serialization (stable key order, newline-terminated)."""
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def report_csv(report: dict) -> str:
    """Flatten the id-rate grid to CSV."""
    lines = ["length_s,condition,hit,wrong,nomatch,n,rate"]
    for length_key in sorted(report["id_rates"], key=float):
        conds = report["id_rates"][length_key]
        for cond in sorted(conds):
            c = conds[cond]
            lines.append(
                f"{length_key},{cond},{c['hit']},{c['wrong']},{c['nomatch']},{c['n']},{c['rate']:.4f}"
            )
    return "\n".join(lines) + "\n"
