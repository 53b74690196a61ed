"""Denoising front-ends and the dual-query "mix" identification strategy.

The built-in baseline is spectral subtraction over a per-bin noise-floor
estimate.  Arbitrary denoisers plug in as subprocesses speaking the SPEC1
format; a failing external denoiser degrades the mix strategy to the raw
path instead of failing the query.
"""

from __future__ import annotations

import os
import shlex
import subprocess
import tempfile
from dataclasses import dataclass

import numpy as np

from .dsp import Spectrogram, Waveform, resample, stft, to_db
from .errors import ExternalDenoiserError
from .fingerprint import (
    DEFAULT_MIN_SCORE,
    FingerprintIndex,
    MatchResult,
    match_spectrogram,
)
from .spec1 import read_spec1, write_spec1

DEFAULT_ALPHA = 2.0
DEFAULT_BETA = 0.01
EXTERNAL_TIMEOUT_S = 30.0
NOISE_PERCENTILE = 10.0
MIN_NOISE_FRAMES = 10


@dataclass(frozen=True)
class DenoiserKind:
    """One of: none, built-in spectral subtraction, or an external command."""

    kind: str
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    command: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in ("none", "spectral_sub", "external"):
            raise ValueError(f"unknown denoiser kind {self.kind!r}")
        if self.kind == "spectral_sub":
            if self.alpha < 1.0:
                raise ValueError(f"alpha must be >= 1, got {self.alpha}")
            if not 0.0 < self.beta < 1.0:
                raise ValueError(f"beta must be in (0, 1), got {self.beta}")
        if self.kind == "external" and not self.command:
            raise ValueError("external denoiser needs a command line")

    @classmethod
    def none(cls) -> "DenoiserKind":
        return cls("none")

    @classmethod
    def spectral_sub(cls, alpha: float = DEFAULT_ALPHA, beta: float = DEFAULT_BETA) -> "DenoiserKind":
        return cls("spectral_sub", alpha=alpha, beta=beta)

    @classmethod
    def external(cls, command: str | list[str] | tuple[str, ...]) -> "DenoiserKind":
        argv = tuple(shlex.split(command)) if isinstance(command, str) else tuple(command)
        return cls("external", command=argv)


def estimate_noise(s: Spectrogram) -> np.ndarray:
    """Per-bin noise floor: the 10th-percentile magnitude across frames."""
    if s.scale != "linear":
        raise ValueError("estimate_noise expects a linear-scale spectrogram")
    if s.n_frames < MIN_NOISE_FRAMES:
        raise ValueError(f"need at least {MIN_NOISE_FRAMES} frames, got {s.n_frames}")
    return np.percentile(s.values, NOISE_PERCENTILE, axis=1).astype(np.float32)


def spectral_subtract(
    s: Spectrogram,
    noise: np.ndarray,
    alpha: float = DEFAULT_ALPHA,
    beta: float = DEFAULT_BETA,
) -> Spectrogram:
    """Oversubtract the noise floor with a spectral floor:
    out = max(s - alpha*noise, beta*s)."""
    if s.scale != "linear":
        raise ValueError("spectral_subtract expects a linear-scale spectrogram")
    noise = np.asarray(noise, dtype=np.float32)
    if noise.shape != (s.n_bins,):
        raise ValueError(f"noise estimate shape {noise.shape} != ({s.n_bins},)")
    out = np.maximum(s.values - alpha * noise[:, None], beta * s.values)
    return Spectrogram(out.astype(np.float32), "linear", s.bin_hz, s.hop_seconds)


def run_external(s: Spectrogram, command: tuple[str, ...] | list[str]) -> Spectrogram:
    """Round-trip a linear spectrogram through ``command <in> <out>``.

    The subprocess must exit 0 within the timeout and write a same-shape
    SPEC1 file; anything else raises ExternalDenoiserError.
    """
    if s.scale != "linear":
        raise ValueError("run_external expects a linear-scale spectrogram")
    with tempfile.TemporaryDirectory(prefix="afp-denoise-") as tmp:
        in_path = os.path.join(tmp, "in.spec1")
        out_path = os.path.join(tmp, "out.spec1")
        write_spec1(in_path, s.values)
        argv = [*command, in_path, out_path]
        try:
            proc = subprocess.run(
                argv, capture_output=True, timeout=EXTERNAL_TIMEOUT_S, text=True
            )
        except subprocess.TimeoutExpired as exc:
            raise ExternalDenoiserError(
                f"denoiser timed out after {EXTERNAL_TIMEOUT_S}s: {argv}"
            ) from exc
        except OSError as exc:
            raise ExternalDenoiserError(f"cannot launch denoiser {argv}: {exc}") from exc
        if proc.returncode != 0:
            raise ExternalDenoiserError(
                f"denoiser exited {proc.returncode}: {argv}\nstderr: {proc.stderr[-2000:]}"
            )
        try:
            out = read_spec1(out_path)
        except (OSError, ValueError) as exc:
            raise ExternalDenoiserError(f"cannot read denoiser output: {exc}") from exc
    if out.shape != s.values.shape:
        raise ExternalDenoiserError(
            f"denoiser changed shape: {s.values.shape} -> {out.shape}"
        )
    return Spectrogram(out, "linear", s.bin_hz, s.hop_seconds)


def denoise_spectrogram(s: Spectrogram, denoiser: DenoiserKind) -> Spectrogram:
    """Apply the chosen denoiser to a linear magnitude spectrogram."""
    if denoiser.kind == "spectral_sub":
        return spectral_subtract(s, estimate_noise(s), denoiser.alpha, denoiser.beta)
    if denoiser.kind == "external":
        return run_external(s, denoiser.command)
    raise ValueError(f"no denoising to apply for kind {denoiser.kind!r}")


def combine_mix(raw: MatchResult, den: MatchResult) -> MatchResult:
    """The dual-query decision rule: more aligned hashes wins, ties go to the
    raw path, and only a double miss stays a miss."""
    if raw.matched and den.matched:
        return den if den.score > raw.score else raw
    return den if den.matched else raw


def denoised_match(
    index: FingerprintIndex,
    query: Waveform,
    denoiser: DenoiserKind,
    min_score: int = DEFAULT_MIN_SCORE,
) -> MatchResult:
    """Identify using the denoised path only."""
    q = resample(query, index.stft_config.target_rate)
    if len(q) < index.stft_config.frame_size:
        raise ValueError("query too short for the index STFT configuration")
    s_lin = stft(q, index.stft_config)
    s_den = denoise_spectrogram(s_lin, denoiser)
    return match_spectrogram(index, to_db(s_den), min_score)


def mix_query(
    index: FingerprintIndex,
    query: Waveform,
    denoiser: DenoiserKind,
    min_score: int = DEFAULT_MIN_SCORE,
) -> MatchResult:
    """Dual-query identification: run the raw and denoised paths and keep the
    candidate with more time-aligned hash matches (ties favor the raw path).

    No-match only when both paths miss.  An external denoiser failure
    degrades to the raw path, flagged via ``warning``.
    """
    if denoiser.kind == "none":
        raise ValueError("mix_query needs a denoiser (kind != 'none')")
    q = resample(query, index.stft_config.target_rate)
    if len(q) < index.stft_config.frame_size:
        raise ValueError("query too short for the index STFT configuration")
    s_lin = stft(q, index.stft_config)
    raw = match_spectrogram(index, to_db(s_lin), min_score)
    try:
        s_den = denoise_spectrogram(s_lin, denoiser)
    except ExternalDenoiserError as exc:
        return MatchResult(
            raw.track_id, raw.score, raw.offset_frames, raw.runner_up_score,
            warning=f"external denoiser failed, raw path only: {exc}",
        )
    den = match_spectrogram(index, to_db(s_den), min_score)
    return combine_mix(raw, den)
