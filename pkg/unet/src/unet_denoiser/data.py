"""Clean/noisy spectrogram pair handling.

Pairs are SPEC1 files referenced by a JSON manifest
(list of {"clean", "noisy", "split"}) or discovered from an augmentation
output directory laid out as <stem>.clean.spec1 + <stem>.aug<k>.spec1.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass

import numpy as np
import torch
from torch.utils.data import Dataset

from .spec1 import read_spec1, read_spec1_shape

_AUG_RE = re.compile(r"^(?P<stem>.+)\.aug(?P<k>\d+)\.spec1$")


class PairDataError(Exception):
    """A manifest entry is unusable (missing file or shape mismatch)."""


@dataclass(frozen=True)
class Pair:
    clean: str
    noisy: str
    split: str = "train"


def load_pair_manifest(path: str | os.PathLike) -> list[Pair]:
    """Load and validate a pair manifest; shapes must match within each pair."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, list):
        raise PairDataError(f"pair manifest {path} must be a JSON list")
    base = os.path.dirname(os.path.abspath(os.fspath(path)))

    def resolve(p: str) -> str:
        return p if os.path.isabs(p) else os.path.join(base, p)

    pairs = [
        Pair(resolve(item["clean"]), resolve(item["noisy"]), item.get("split", "train"))
        for item in raw
    ]
    validate_pairs(pairs)
    return pairs


def validate_pairs(pairs: list[Pair]) -> None:
    for pair in pairs:
        for p in (pair.clean, pair.noisy):
            if not os.path.exists(p):
                raise PairDataError(f"pair ({pair.clean}, {pair.noisy}): missing file {p}")
        try:
            shape_c = read_spec1_shape(pair.clean)
            shape_n = read_spec1_shape(pair.noisy)
        except ValueError as exc:
            raise PairDataError(f"pair ({pair.clean}, {pair.noisy}): {exc}") from exc
        if shape_c != shape_n:
            raise PairDataError(
                f"pair ({pair.clean}, {pair.noisy}): shape mismatch {shape_c} vs {shape_n}"
            )


def pairs_from_aug_dir(
    directory: str | os.PathLike, val_fraction: float = 0.1, seed: int = 0
) -> list[Pair]:
    """Discover <stem>.aug<k>.spec1 / <stem>.clean.spec1 pairs and assign
    deterministic train/val splits."""
    directory = os.fspath(directory)
    found = []
    for name in sorted(os.listdir(directory)):
        m = _AUG_RE.match(name)
        if not m:
            continue
        clean = os.path.join(directory, f"{m.group('stem')}.clean.spec1")
        noisy = os.path.join(directory, name)
        if not os.path.exists(clean):
            raise PairDataError(f"{noisy}: no matching clean spectrogram {clean}")
        found.append((clean, noisy))
    if not found:
        raise PairDataError(f"no .aug<k>.spec1 files under {directory}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(found))
    n_val = max(1, int(round(val_fraction * len(found))))
    val_idx = set(int(i) for i in order[:n_val])
    pairs = [
        Pair(clean, noisy, "val" if i in val_idx else "train")
        for i, (clean, noisy) in enumerate(found)
    ]
    validate_pairs(pairs)
    return pairs


def write_pair_manifest(path: str | os.PathLike, pairs: list[Pair]) -> None:
    payload = [{"clean": p.clean, "noisy": p.noisy, "split": p.split} for p in pairs]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


class PairDataset(Dataset):
    """Loads normalized (noisy, clean, scale) tensors.

    Each sample is scaled by max(noisy) so the network sees a stable range;
    the scale rides along so losses can be reported in original units.
    ``crop_frames`` takes a seeded random time crop (training); None keeps
    the full width (validation).
    """

    def __init__(self, pairs: list[Pair], crop_frames: int | None = None, seed: int = 0):
        self.pairs = pairs
        self.crop_frames = crop_frames
        self.seed = seed
        self.epoch = 0

    def __len__(self) -> int:
        return len(self.pairs)

    def __getitem__(self, idx: int):
        pair = self.pairs[idx]
        clean = read_spec1(pair.clean)
        noisy = read_spec1(pair.noisy)
        if self.crop_frames is not None and noisy.shape[1] > self.crop_frames:
            rng = np.random.default_rng(
                np.random.SeedSequence([self.seed, self.epoch, idx])
            )
            start = int(rng.integers(0, noisy.shape[1] - self.crop_frames + 1))
            clean = clean[:, start : start + self.crop_frames]
            noisy = noisy[:, start : start + self.crop_frames]
        scale = float(noisy.max()) + 1e-8
        return (
            torch.from_numpy(noisy / scale)[None],
            torch.from_numpy(clean / scale)[None],
            torch.tensor(scale, dtype=torch.float32),
        )
