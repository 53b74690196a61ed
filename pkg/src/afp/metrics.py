"""Evaluation metrics: L1 distance, PSNR, peak precision/recall/F1, and the
top-1 identification rate."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dsp import Spectrogram
from .peaks import Peak


def l1_distance(a: Spectrogram, b: Spectrogram) -> float:
    """Mean absolute elementwise difference."""
    if a.values.shape != b.values.shape:
        raise ValueError(f"shape mismatch: {a.values.shape} vs {b.values.shape}")
    if a.scale != b.scale:
        raise ValueError(f"scale mismatch: {a.scale} vs {b.scale}")
    return float(np.mean(np.abs(a.values.astype(np.float64) - b.values.astype(np.float64))))


def psnr(ref: Spectrogram, test: Spectrogram) -> float:
    """Peak signal-to-noise ratio in dB against the reference's maximum.

    Identical inputs give math.inf.
    """
    if ref.values.shape != test.values.shape:
        raise ValueError(f"shape mismatch: {ref.values.shape} vs {test.values.shape}")
    if ref.scale != test.scale:
        raise ValueError(f"scale mismatch: {ref.scale} vs {test.scale}")
    peak = float(np.max(ref.values))
    if peak <= 0.0:
        raise ValueError("reference maximum is not positive; PSNR undefined")
    mse = float(np.mean(np.square(ref.values.astype(np.float64) - test.values.astype(np.float64))))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


@dataclass(frozen=True)
class PeakMatchReport:
    precision: float
    recall: float
    f1: float
    n_ref: int
    n_test: int
    n_matched: int


def peak_prf(
    ref_peaks: list[Peak],
    test_peaks: list[Peak],
    tol_t: int = 0,
    tol_f: int = 0,
) -> PeakMatchReport:
    """Greedy one-to-one peak matching within (+-tol_t frames, +-tol_f bins).

    Test peaks are visited in (t, f) order; each takes the nearest unmatched
    reference peak (time distance first, then frequency).  Empty-vs-empty
    counts as a perfect match.
    """
    ref_sorted = sorted((p.t_frame, p.f_bin) for p in ref_peaks)
    test_sorted = sorted((p.t_frame, p.f_bin) for p in test_peaks)
    available: dict[tuple[int, int], bool] = {c: True for c in ref_sorted}
    matched = 0
    if tol_t == 0 and tol_f == 0:
        for c in test_sorted:
            if available.get(c, False):
                available[c] = False
                matched += 1
    else:
        for t, f in test_sorted:
            best = None
            for rt, rf in ref_sorted:
                if rt < t - tol_t:
                    continue
                if rt > t + tol_t:
                    break
                if abs(rf - f) <= tol_f and available[(rt, rf)]:
                    key = (abs(rt - t), abs(rf - f), rt, rf)
                    if best is None or key < best[0]:
                        best = (key, (rt, rf))
            if best is not None:
                available[best[1]] = False
                matched += 1
    n_ref, n_test = len(ref_sorted), len(test_sorted)
    precision = 1.0 if n_test == 0 else matched / n_test
    recall = 1.0 if n_ref == 0 else matched / n_ref
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return PeakMatchReport(precision, recall, f1, n_ref, n_test, matched)


def identification_rate(outcomes: list[bool]) -> float:
    """Percentage of top-1 hits."""
    if not outcomes:
        raise ValueError("identification_rate of an empty outcome list")
    return 100.0 * sum(1 for o in outcomes if o) / len(outcomes)
