"""Supervised training: predict clean magnitude spectrograms from noisy ones
with an L1 loss, Adam, and a reduce-on-plateau schedule.

Checkpoints the best validation loss and writes a training-curve JSON next to
it.  Validation runs every tenth of an epoch (as a step-count fraction) and
is reported in original magnitude units, so it is directly comparable to the
no-model baseline L1 between noisy and clean.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import torch
from torch.utils.data import DataLoader

from .data import Pair, PairDataError, PairDataset
from .model import GRID, DenoiserUNet


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 32
    learning_rate: float = 1e-3
    scheduler_patience: int = 2
    scheduler_factor: float = 0.5
    dropout: float = 0.05
    epochs: int = 10
    val_every_epoch_fraction: float = 0.1
    crop_frames: int | None = 64
    min_train_pairs: int = 100
    seed: int = 0
    device: str = "cpu"

    def __post_init__(self):
        if min(self.batch_size, self.epochs, self.scheduler_patience) <= 0:
            raise ValueError("batch_size, epochs, scheduler_patience must be positive")
        if self.learning_rate <= 0 or not 0 < self.scheduler_factor < 1:
            raise ValueError("bad learning_rate or scheduler_factor")
        if not 0 <= self.dropout < 1:
            raise ValueError(f"dropout must be in [0,1), got {self.dropout}")
        if not 0 < self.val_every_epoch_fraction <= 1:
            raise ValueError("val_every_epoch_fraction must be in (0,1]")


def _pad_batch(x: torch.Tensor) -> torch.Tensor:
    pad_b = (-x.shape[2]) % GRID
    pad_f = (-x.shape[3]) % GRID
    if pad_b or pad_f:
        x = torch.nn.functional.pad(x, (0, pad_f, 0, pad_b))
    return x


def _forward(model: DenoiserUNet, noisy: torch.Tensor) -> torch.Tensor:
    bins, frames = noisy.shape[2], noisy.shape[3]
    out = model(_pad_batch(noisy))
    return out[:, :, :bins, :frames]


@torch.no_grad()
def _validate(model: DenoiserUNet, loader: DataLoader, device: str) -> float:
    """Mean L1 between denoised and clean in original magnitude units."""
    model.eval()
    total, count = 0.0, 0
    for noisy, clean, scale in loader:
        noisy, clean = noisy.to(device), clean.to(device)
        scale = scale.to(device).view(-1, 1, 1, 1)
        out = _forward(model, noisy)
        err = torch.mean(torch.abs(out - clean) * scale, dim=(1, 2, 3))
        total += float(err.sum())
        count += len(err)
    model.train()
    return total / max(count, 1)


def baseline_l1(pairs: list[Pair]) -> float:
    """The no-model reference: mean L1 between noisy and clean."""
    from .spec1 import read_spec1

    if not pairs:
        raise ValueError("no pairs to evaluate")
    vals = [
        float(np.mean(np.abs(read_spec1(p.noisy) - read_spec1(p.clean)))) for p in pairs
    ]
    return float(np.mean(vals))


def train(pairs: list[Pair], cfg: TrainConfig, out_dir: str | os.PathLike) -> Path:
    """Train on the "train" split, validate on "val", keep the best weights.

    Returns the checkpoint path; the training curve lands next to it as
    curve.json.
    """
    train_pairs = [p for p in pairs if p.split == "train"]
    val_pairs = [p for p in pairs if p.split == "val"]
    if len(train_pairs) < cfg.min_train_pairs:
        raise ValueError(
            f"need at least {cfg.min_train_pairs} training pairs, got {len(train_pairs)}"
        )
    if not val_pairs:
        raise PairDataError("no pairs labeled split='val'")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ckpt_path = out_dir / "denoiser.pt"
    curve_path = out_dir / "curve.json"

    torch.manual_seed(cfg.seed)
    device = cfg.device
    model = DenoiserUNet(dropout=cfg.dropout).to(device)
    model.train()
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate)
    scheduler = torch.optim.lr_scheduler.ReduceLROnPlateau(
        optimizer, mode="min", factor=cfg.scheduler_factor, patience=cfg.scheduler_patience
    )

    train_set = PairDataset(train_pairs, crop_frames=cfg.crop_frames, seed=cfg.seed)
    val_set = PairDataset(val_pairs, crop_frames=None)
    loader_gen = torch.Generator().manual_seed(cfg.seed)
    train_loader = DataLoader(
        train_set, batch_size=cfg.batch_size, shuffle=True, generator=loader_gen
    )
    val_loader = DataLoader(val_set, batch_size=cfg.batch_size)

    steps_per_epoch = max(1, len(train_loader))
    val_every = max(1, round(steps_per_epoch * cfg.val_every_epoch_fraction))

    curve: list[dict] = []
    best_val = float("inf")
    step = 0
    for epoch in range(cfg.epochs):
        train_set.epoch = epoch
        for noisy, clean, _scale in train_loader:
            noisy, clean = noisy.to(device), clean.to(device)
            optimizer.zero_grad()
            out = _forward(model, noisy)
            loss = torch.mean(torch.abs(out - clean))
            loss.backward()
            optimizer.step()
            step += 1
            if step % val_every == 0:
                val_l1 = _validate(model, val_loader, device)
                scheduler.step(val_l1)
                lr = optimizer.param_groups[0]["lr"]
                curve.append(
                    {
                        "step": step,
                        "epoch": round(step / steps_per_epoch, 4),
                        "train_l1_scaled": float(loss.detach()),
                        "val_l1": val_l1,
                        "lr": lr,
                    }
                )
                if val_l1 < best_val:
                    best_val = val_l1
                    torch.save(
                        {
                            "state_dict": model.state_dict(),
                            "dropout": cfg.dropout,
                            "val_l1": val_l1,
                            "step": step,
                        },
                        ckpt_path,
                    )

    summary = {
        "config": asdict(cfg),
        "n_train_pairs": len(train_pairs),
        "n_val_pairs": len(val_pairs),
        "steps": step,
        "best_val_l1": best_val,
        "baseline_val_l1": baseline_l1(val_pairs),
        "curve": curve,
    }
    curve_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return ckpt_path


def load_model(checkpoint: str | os.PathLike, device: str = "cpu") -> DenoiserUNet:
    payload = torch.load(checkpoint, map_location=device, weights_only=True)
    model = DenoiserUNet(dropout=float(payload.get("dropout", 0.05)))
    model.load_state_dict(payload["state_dict"])
    model.to(device)
    model.eval()
    return model
