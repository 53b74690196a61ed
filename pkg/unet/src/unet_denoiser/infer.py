"""One-shot inference conforming to the external-denoiser subprocess contract:
read a SPEC1 file, denoise, write a same-shape SPEC1 file, exit 0."""

from __future__ import annotations

import os
import sys

import numpy as np

from .model import denoise_matrix
from .spec1 import read_spec1, write_spec1
from .train import load_model


def infer(input_path: str | os.PathLike, output_path: str | os.PathLike,
          checkpoint: str | os.PathLike, device: str = "cpu") -> int:
    """Returns a process exit code; diagnostics go to stderr."""
    try:
        model = load_model(checkpoint, device=device)
    except Exception as exc:
        print(f"unet-infer: cannot load checkpoint {checkpoint}: {exc}", file=sys.stderr)
        return 2
    try:
        mat = read_spec1(input_path)
    except (OSError, ValueError) as exc:
        print(f"unet-infer: bad input: {exc}", file=sys.stderr)
        return 3
    out = denoise_matrix(model, mat, device=device)
    if out.shape != mat.shape or not np.isfinite(out).all() or (out < 0).any():
        print("unet-infer: model produced an invalid output matrix", file=sys.stderr)
        return 4
    try:
        write_spec1(output_path, out)
    except OSError as exc:
        print(f"unet-infer: cannot write output: {exc}", file=sys.stderr)
        return 5
    return 0
