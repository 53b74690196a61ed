"""Compact U-Net for magnitude spectrogram denoising.

Four strided-conv downsampling blocks (each followed by dropout), four
transposed-conv upsampling blocks with skip connections, base width 32.
Inputs are [batch, 1, bins, frames]; both spatial dims must be multiples of
16 (see pad_to_grid / crop_to).  The softplus head keeps outputs
non-negative.
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

GRID = 16  # 2**n_downsampling_blocks
_WIDTHS = (32, 48, 64, 96, 128)


class _Down(nn.Module):
    def __init__(self, c_in: int, c_out: int, dropout: float):
        super().__init__()
        self.block = nn.Sequential(
            nn.Conv2d(c_in, c_out, kernel_size=3, stride=2, padding=1),
            nn.ReLU(inplace=True),
            nn.Dropout2d(dropout),
        )

    def forward(self, x):
        return self.block(x)


class _Up(nn.Module):
    def __init__(self, c_in: int, c_skip: int, c_out: int, merge_3x3: bool):
        super().__init__()
        self.up = nn.ConvTranspose2d(c_in, c_out, kernel_size=2, stride=2)
        k, pad = (3, 1) if merge_3x3 else (1, 0)
        self.merge = nn.Sequential(
            nn.Conv2d(c_out + c_skip, c_out, kernel_size=k, padding=pad),
            nn.ReLU(inplace=True),
        )

    def forward(self, x, skip):
        x = self.up(x)
        return self.merge(torch.cat([x, skip], dim=1))


class DenoiserUNet(nn.Module):
    def __init__(self, dropout: float = 0.05):
        super().__init__()
        w0, w1, w2, w3, w4 = _WIDTHS
        self.stem = nn.Sequential(nn.Conv2d(1, w0, kernel_size=3, padding=1), nn.ReLU(inplace=True))
        self.down1 = _Down(w0, w1, dropout)
        self.down2 = _Down(w1, w2, dropout)
        self.down3 = _Down(w2, w3, dropout)
        self.down4 = _Down(w3, w4, dropout)
        self.bottleneck = nn.Sequential(
            nn.Conv2d(w4, w4, kernel_size=3, padding=1), nn.ReLU(inplace=True)
        )
        # deeper merges afford 3x3; the two full-resolution merges stay 1x1
        self.up1 = _Up(w4, w3, w3, merge_3x3=True)
        self.up2 = _Up(w3, w2, w2, merge_3x3=True)
        self.up3 = _Up(w2, w1, w1, merge_3x3=False)
        self.up4 = _Up(w1, w0, w0, merge_3x3=False)
        self.head = nn.Conv2d(w0, 1, kernel_size=1)

    def forward(self, x):
        s0 = self.stem(x)
        s1 = self.down1(s0)
        s2 = self.down2(s1)
        s3 = self.down3(s2)
        x = self.bottleneck(self.down4(s3))
        x = self.up1(x, s3)
        x = self.up2(x, s2)
        x = self.up3(x, s1)
        x = self.up4(x, s0)
        return nn.functional.softplus(self.head(x))


def pad_to_grid(mat: np.ndarray) -> tuple[np.ndarray, tuple[int, int]]:
    """Zero-pad a [bins, frames] matrix so both dims divide the model grid."""
    bins, frames = mat.shape
    pad_b = (-bins) % GRID
    pad_f = (-frames) % GRID
    if pad_b or pad_f:
        mat = np.pad(mat, ((0, pad_b), (0, pad_f)))
    return mat, (bins, frames)


def crop_to(mat: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    return mat[: shape[0], : shape[1]]


def denoise_matrix(model: nn.Module, mat: np.ndarray, device: str = "cpu") -> np.ndarray:
    """One-shot inference on a [bins, frames] linear magnitude matrix."""
    model.eval()
    padded, orig_shape = pad_to_grid(mat.astype(np.float32))
    scale = float(padded.max()) + 1e-8
    x = torch.from_numpy(padded / scale)[None, None].to(device)
    with torch.no_grad():
        y = model(x)[0, 0].cpu().numpy()
    return crop_to(y * scale, orig_shape).astype(np.float32)
