"""Landmark fingerprinting: pairing, 32-bit hash packing, inverted index,
offset-histogram matching, and binary persistence.

Hashes pack (anchor bin, bin delta, frame delta) into 32 bits.  The index is
a flat array of (hash, track_id, t_anchor) rows sorted by hash, so lookups
are binary-search range scans and serialization is trivially byte-exact.
"""

from __future__ import annotations

import io
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .dsp import Spectrogram, StftConfig, Waveform, resample, stft, to_db
from .errors import CorruptIndexError
from .peaks import Peak, extract_peaks

MAGIC = b"AFPI"
VERSION = 1
_PROFILE_IDS = {"maxfilter": 0, "envelope": 1}
_PROFILE_NAMES = {v: k for k, v in _PROFILE_IDS.items()}

MAX_DELTA_T = 63
MAX_ABS_DELTA_F = 127
DEFAULT_FANOUT = 5
DEFAULT_MIN_SCORE = 4


class Landmark(NamedTuple):
    f1: int
    delta_f: int
    delta_t: int
    t_anchor: int


def pair_landmarks(peaks: list[Peak], fanout: int = DEFAULT_FANOUT) -> list[Landmark]:
    """Pair each anchor peak with up to ``fanout`` later peaks in the target
    zone 0 < dt <= 63, |df| <= 127, nearest in time first.

    ``peaks`` must be sorted by (t_frame, f_bin).
    """
    landmarks: list[Landmark] = []
    n = len(peaks)
    for i, anchor in enumerate(peaks):
        made = 0
        for j in range(i + 1, n):
            target = peaks[j]
            dt = target.t_frame - anchor.t_frame
            if dt > MAX_DELTA_T:
                break
            if dt <= 0:
                continue
            df = target.f_bin - anchor.f_bin
            if abs(df) > MAX_ABS_DELTA_F:
                continue
            landmarks.append(Landmark(anchor.f_bin, df, dt, anchor.t_frame))
            made += 1
            if made >= fanout:
                break
    return landmarks


def pack_hash(lm: Landmark) -> int:
    """Pack a landmark into an unsigned 32-bit hash."""
    if not 0 <= lm.f1 < 512:
        raise ValueError(f"f1 out of range [0, 511]: {lm.f1}")
    if abs(lm.delta_f) > MAX_ABS_DELTA_F:
        raise ValueError(f"|delta_f| exceeds {MAX_ABS_DELTA_F}: {lm.delta_f}")
    if not 0 < lm.delta_t <= MAX_DELTA_T:
        raise ValueError(f"delta_t outside (0, {MAX_DELTA_T}]: {lm.delta_t}")
    return (lm.f1 & 0x1FF) << 23 | ((lm.delta_f + 256) & 0x1FF) << 14 | (lm.delta_t & 0x3FFF)


def unpack_hash(h: int) -> tuple[int, int, int]:
    """Inverse of :func:`pack_hash`: (f1, delta_f, delta_t)."""
    if not 0 <= h < 2**32:
        raise ValueError(f"hash out of 32-bit range: {h}")
    return (h >> 23) & 0x1FF, ((h >> 14) & 0x1FF) - 256, h & 0x3FFF


def _pack_hashes(landmarks: list[Landmark]) -> np.ndarray:
    if not landmarks:
        return np.zeros(0, dtype=np.uint32)
    arr = np.asarray(landmarks, dtype=np.int64)
    f1, df, dt = arr[:, 0], arr[:, 1], arr[:, 2]
    return ((f1 & 0x1FF) << 23 | ((df + 256) & 0x1FF) << 14 | (dt & 0x3FFF)).astype(np.uint32)


@dataclass(frozen=True)
class FingerprintIndex:
    """Immutable searchable hash store."""

    entries: np.ndarray  # (N, 3) uint32 rows [hash, track_id, t_anchor], lexsorted
    track_table: dict[int, tuple[str, int]]  # id -> (name, n_frames)
    stft_config: StftConfig
    peak_profile: str

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.uint32)
        if entries.ndim != 2 or entries.shape[1] != 3:
            raise ValueError("entries must be an (N, 3) array")
        if entries is self.entries:
            entries = entries.copy()
        entries.flags.writeable = False
        object.__setattr__(self, "entries", entries)
        if self.peak_profile not in _PROFILE_IDS:
            raise ValueError(f"unknown peak profile {self.peak_profile!r}")

    @property
    def n_entries(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class MatchResult:
    """Ranked identification outcome; ``track_id`` is None on no-match."""

    track_id: int | None
    score: int
    offset_frames: int
    runner_up_score: int
    warning: str | None = None

    @property
    def matched(self) -> bool:
        return self.track_id is not None


def fingerprint_waveform(
    w: Waveform, cfg: StftConfig, profile: str
) -> tuple[list[Landmark], int]:
    """Full front-end for one waveform: resample, STFT, dB, peaks, landmarks.

    Returns the landmarks and the spectrogram frame count.
    """
    w = resample(w, cfg.target_rate)
    if len(w) < cfg.frame_size:
        raise ValueError(
            f"waveform too short at target rate: {len(w)} < frame_size {cfg.frame_size}"
        )
    s_db = to_db(stft(w, cfg))
    landmarks = pair_landmarks(extract_peaks(s_db, profile))
    return landmarks, s_db.n_frames


def landmarks_from_spectrogram(s_db: Spectrogram, profile: str) -> list[Landmark]:
    return pair_landmarks(extract_peaks(s_db, profile))


def build_index(
    tracks: Iterable[tuple[int, Waveform]],
    cfg: StftConfig = StftConfig(),
    profile: str = "maxfilter",
    names: dict[int, str] | None = None,
    threads: int = 1,
) -> FingerprintIndex:
    """Fingerprint every track and assemble the sorted index.

    Deterministic regardless of ``threads``: per-track results are gathered
    in input order and globally sorted by (hash, track_id, t_anchor).
    """
    track_list = list(tracks)
    ids = [tid for tid, _ in track_list]
    if len(set(ids)) != len(ids):
        dupes = sorted({t for t in ids if ids.count(t) > 1})
        raise ValueError(f"duplicate track ids: {dupes}")
    if any(tid < 0 or tid >= 2**32 for tid in ids):
        raise ValueError("track ids must fit in unsigned 32 bits")

    def one(item: tuple[int, Waveform]):
        tid, w = item
        landmarks, n_frames = fingerprint_waveform(w, cfg, profile)
        hashes = _pack_hashes(landmarks)
        t_anchor = np.asarray([lm.t_anchor for lm in landmarks], dtype=np.uint32)
        rows = np.column_stack(
            [hashes, np.full(len(hashes), tid, dtype=np.uint32), t_anchor]
        ).astype(np.uint32)
        return tid, rows, n_frames

    if threads > 1 and len(track_list) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, track_list))
    else:
        results = [one(item) for item in track_list]

    table: dict[int, tuple[str, int]] = {}
    chunks = []
    for tid, rows, n_frames in results:
        name = (names or {}).get(tid, str(tid))
        table[tid] = (name, n_frames)
        chunks.append(rows)
    entries = np.concatenate(chunks) if chunks else np.zeros((0, 3), dtype=np.uint32)
    order = np.lexsort((entries[:, 2], entries[:, 1], entries[:, 0]))
    return FingerprintIndex(entries[order], table, cfg, profile)


def _score_tracks(
    index: FingerprintIndex, landmarks: list[Landmark]
) -> dict[int, tuple[int, int]]:
    """Per-track best (score, offset): the tallest 3-wide window of the
    offset histogram delta = t_anchor(db) - t_anchor(query)."""
    if not landmarks:
        return {}
    hashes = _pack_hashes(landmarks)
    q_t = np.asarray([lm.t_anchor for lm in landmarks], dtype=np.int64)
    column = np.ascontiguousarray(index.entries[:, 0])
    lo = np.searchsorted(column, hashes, side="left")
    hi = np.searchsorted(column, hashes, side="right")
    vote_tracks, vote_deltas = [], []
    for i in range(len(hashes)):
        if lo[i] == hi[i]:
            continue
        rows = index.entries[lo[i] : hi[i]]
        vote_tracks.append(rows[:, 1].astype(np.int64))
        vote_deltas.append(rows[:, 2].astype(np.int64) - q_t[i])
    if not vote_tracks:
        return {}
    tracks = np.concatenate(vote_tracks)
    deltas = np.concatenate(vote_deltas)
    order = np.argsort(tracks, kind="stable")
    tracks, deltas = tracks[order], deltas[order]
    bounds = np.nonzero(np.diff(tracks))[0] + 1
    scores: dict[int, tuple[int, int]] = {}
    for start, stop in zip(np.r_[0, bounds], np.r_[bounds, len(tracks)]):
        d = deltas[start:stop]
        d_min = int(d.min())
        counts = np.bincount(d - d_min)
        windowed = np.convolve(counts, [1, 1, 1], mode="same")
        best = int(np.argmax(windowed))
        scores[int(tracks[start])] = (int(windowed[best]), d_min + best)
    return scores


def _rank(scores: dict[int, tuple[int, int]], min_score: int) -> MatchResult:
    if not scores:
        return MatchResult(None, 0, 0, 0)
    ranked = sorted(scores.items(), key=lambda kv: (-kv[1][0], kv[0]))
    best_id, (best_score, best_offset) = ranked[0]
    runner_up = ranked[1][1][0] if len(ranked) > 1 else 0
    if best_score < min_score:
        return MatchResult(None, best_score, best_offset, runner_up)
    return MatchResult(best_id, best_score, best_offset, runner_up)


def match_landmarks(
    index: FingerprintIndex, landmarks: list[Landmark], min_score: int = DEFAULT_MIN_SCORE
) -> MatchResult:
    """Match pre-extracted query landmarks against the index."""
    return _rank(_score_tracks(index, landmarks), min_score)


def match_query(
    index: FingerprintIndex, query: Waveform, min_score: int = DEFAULT_MIN_SCORE
) -> MatchResult:
    """Identify a query snippet: top aligned-hash count wins, ties to the
    smallest track id, no-match below ``min_score``."""
    landmarks, _ = fingerprint_waveform(query, index.stft_config, index.peak_profile)
    return match_landmarks(index, landmarks, min_score)


def match_spectrogram(
    index: FingerprintIndex, s_db: Spectrogram, min_score: int = DEFAULT_MIN_SCORE
) -> MatchResult:
    """Identify from an already-computed dB spectrogram (denoised front-ends)."""
    return match_landmarks(index, landmarks_from_spectrogram(s_db, index.peak_profile), min_score)


def save_index(index: FingerprintIndex, path: str | os.PathLike) -> None:
    """Serialize to the AFPI binary format (little-endian throughout)."""
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<I", VERSION))
    cfg = index.stft_config
    window = cfg.window.encode("utf-8")
    buf.write(struct.pack("<III", cfg.frame_size, cfg.hop_size, cfg.target_rate))
    buf.write(struct.pack("<B", len(window)))
    buf.write(window)
    buf.write(struct.pack("<B", _PROFILE_IDS[index.peak_profile]))
    buf.write(struct.pack("<I", len(index.track_table)))
    for tid in sorted(index.track_table):
        name, n_frames = index.track_table[tid]
        name_b = name.encode("utf-8")
        buf.write(struct.pack("<IIH", tid, n_frames, len(name_b)))
        buf.write(name_b)
    buf.write(struct.pack("<Q", index.n_entries))
    buf.write(np.ascontiguousarray(index.entries, dtype="<u4").tobytes())
    with open(path, "wb") as fh:
        fh.write(buf.getvalue())


class _Reader:
    def __init__(self, data: bytes, path: str):
        self.data = data
        self.off = 0
        self.path = path

    def take(self, n: int, what: str) -> bytes:
        if self.off + n > len(self.data):
            raise CorruptIndexError(
                f"{self.path}: truncated {what} at byte offset {self.off} "
                f"(need {n} bytes, have {len(self.data) - self.off})"
            )
        out = self.data[self.off : self.off + n]
        self.off += n
        return out

    def unpack(self, fmt: str, what: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def load_index(path: str | os.PathLike) -> FingerprintIndex:
    """Read an AFPI file; bad magic/version/truncation raise CorruptIndexError."""
    with open(path, "rb") as fh:
        data = fh.read()
    r = _Reader(data, os.fspath(path))
    magic = r.take(4, "magic")
    if magic != MAGIC:
        raise CorruptIndexError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    (version,) = r.unpack("<I", "version")
    if version != VERSION:
        raise CorruptIndexError(f"{path}: unsupported version {version}")
    frame_size, hop_size, target_rate = r.unpack("<III", "stft config")
    (win_len,) = r.unpack("<B", "window id")
    window = r.take(win_len, "window id").decode("utf-8")
    (profile_id,) = r.unpack("<B", "profile id")
    if profile_id not in _PROFILE_NAMES:
        raise CorruptIndexError(f"{path}: unknown profile id {profile_id}")
    (n_tracks,) = r.unpack("<I", "track count")
    table: dict[int, tuple[str, int]] = {}
    for _ in range(n_tracks):
        tid, n_frames, name_len = r.unpack("<IIH", "track table")
        name = r.take(name_len, "track name").decode("utf-8")
        table[tid] = (name, n_frames)
    (n_entries,) = r.unpack("<Q", "entry count")
    raw = r.take(n_entries * 12, "entries section")
    if r.off != len(data):
        raise CorruptIndexError(f"{path}: {len(data) - r.off} trailing bytes after entries")
    entries = np.frombuffer(raw, dtype="<u4").reshape(n_entries, 3).astype(np.uint32)
    if n_entries and np.any(np.diff(entries[:, 0].astype(np.int64)) < 0):
        raise CorruptIndexError(f"{path}: entries are not sorted by hash")
    try:
        cfg = StftConfig(frame_size, hop_size, window, target_rate)
    except ValueError as exc:
        raise CorruptIndexError(f"{path}: invalid stored config: {exc}") from exc
    return FingerprintIndex(entries, table, cfg, _PROFILE_NAMES[profile_id])
