"""Spectral peak extraction.

Two profiles cover the two common peak-picking families:

* ``maxfilter`` — a cell is a peak when nothing in its square time-frequency
  neighborhood is louder and it clears an absolute dB threshold.  Equal-valued
  maxima inside one neighborhood are resolved greedily in (frame, bin) order,
  so the earliest/lowest cell wins.
* ``envelope`` — peaks must rise above a per-bin threshold envelope that each
  accepted peak raises (a Gaussian bump around its bin) and that decays
  exponentially per frame; a backward pass prunes peaks masked by later,
  louder ones.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy import ndimage

from .dsp import Spectrogram

PROFILES = ("maxfilter", "envelope")

MAXFILTER_RADIUS = 15
MAXFILTER_THRESHOLD_DB = -60.0
ENVELOPE_SIGMA_BINS = 8.0
ENVELOPE_DECAY = 0.998


class Peak(NamedTuple):
    t_frame: int
    f_bin: int
    mag_db: float


def extract_peaks(
    s: Spectrogram,
    profile: str = "maxfilter",
    threshold_db: float = MAXFILTER_THRESHOLD_DB,
) -> list[Peak]:
    """Extract constellation peaks from a dB spectrogram.

    ``threshold_db`` applies to the maxfilter profile only.  Output is
    sorted by (t_frame, f_bin).
    """
    if s.scale != "db":
        raise ValueError("extract_peaks expects a dB-scale spectrogram")
    if profile == "maxfilter":
        return _maxfilter_peaks(s.values, threshold_db)
    if profile == "envelope":
        return _envelope_peaks(s.values)
    raise ValueError(f"unknown peak profile {profile!r} (choose from {PROFILES})")


def _maxfilter_peaks(values: np.ndarray, threshold_db: float) -> list[Peak]:
    radius = MAXFILTER_RADIUS
    neighborhood_max = ndimage.maximum_filter(
        values, size=2 * radius + 1, mode="constant", cval=-np.inf
    )
    candidate = (values >= neighborhood_max) & (values > threshold_db)
    coords = np.argwhere(candidate)  # (f_bin, t_frame) pairs
    if len(coords) == 0:
        return []
    order = np.lexsort((coords[:, 0], coords[:, 1]))
    coords = coords[order]
    accepted: list[Peak] = []
    # Any two candidates inside one neighborhood tie exactly (neither can be
    # strictly larger), so conflicts reduce to proximity against already
    # accepted peaks.
    for f_bin, t_frame in coords:
        clash = False
        for prev in reversed(accepted):
            if t_frame - prev.t_frame > radius:
                break
            if abs(int(f_bin) - prev.f_bin) <= radius:
                clash = True
                break
        if not clash:
            accepted.append(Peak(int(t_frame), int(f_bin), float(values[f_bin, t_frame])))
    return accepted


def _gaussian_profile(n_bins: int, sigma: float) -> np.ndarray:
    # length 2*n_bins+1 so any center slices to a full-width view
    offsets = np.arange(-n_bins, n_bins + 1, dtype=np.float64)
    return np.exp(-0.5 * (offsets / sigma) ** 2)


def _column_local_maxima(col: np.ndarray) -> np.ndarray:
    """Indices of local maxima along one column (plateaus flag their last cell)."""
    n = len(col)
    if n == 1:
        return np.array([0])
    rising = np.empty(n + 1, dtype=bool)
    rising[0] = True
    rising[1:n] = col[1:] >= col[:-1]
    rising[n] = False
    return np.nonzero(rising[:-1] & ~rising[1:])[0]


def _envelope_peaks(values: np.ndarray) -> list[Peak]:
    n_bins, n_frames = values.shape
    work = values.astype(np.float64) - float(np.mean(values))
    gauss = _gaussian_profile(n_bins, ENVELOPE_SIGMA_BINS)

    def bump(center: int) -> np.ndarray:
        return gauss[n_bins - center : 2 * n_bins - center]

    keep = np.zeros_like(work, dtype=bool)
    env = np.zeros(n_bins)
    for t in range(n_frames):
        col = work[:, t]
        maxima = _column_local_maxima(col)
        for f in sorted(maxima, key=lambda i: (-col[i], i)):
            if col[f] > env[f]:
                keep[f, t] = True
                env = np.maximum(env, col[f] * bump(int(f)))
        env *= ENVELOPE_DECAY

    env = np.zeros(n_bins)
    for t in range(n_frames - 1, -1, -1):
        flagged = np.nonzero(keep[:, t])[0]
        for f in sorted(flagged, key=lambda i: (-work[i, t], i)):
            if work[f, t] >= env[f]:
                env = np.maximum(env, work[f, t] * bump(int(f)))
            else:
                keep[f, t] = False
        env *= ENVELOPE_DECAY

    coords = np.argwhere(keep)
    order = np.lexsort((coords[:, 0], coords[:, 1]))
    return [Peak(int(t), int(f), float(values[f, t])) for f, t in coords[order]]
