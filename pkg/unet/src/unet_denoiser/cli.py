"""Console entry points: unet-train and unet-infer."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .data import PairDataError, load_pair_manifest, pairs_from_aug_dir, write_pair_manifest
from .infer import infer
from .train import TrainConfig, train


def train_main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="unet-train", description="train the spectrogram denoiser on clean/noisy SPEC1 pairs"
    )
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--pairs", help="pair manifest JSON ({clean, noisy, split} list)")
    source.add_argument(
        "--from-aug-dir",
        help="directory of <stem>.clean.spec1 / <stem>.aug<k>.spec1 files "
        "(as written by `afp augment --spectrograms`)",
    )
    parser.add_argument("--out-dir", required=True, help="checkpoint + curve output directory")
    parser.add_argument("--epochs", type=int, default=10)
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--val-fraction", type=float, default=0.1,
                        help="val share when discovering pairs from a directory")
    parser.add_argument("--crop-frames", type=int, default=64,
                        help="random time crop for training batches (0 = full width)")
    parser.add_argument("--min-train-pairs", type=int, default=100)
    ns = parser.parse_args(argv)
    try:
        if ns.pairs:
            pairs = load_pair_manifest(ns.pairs)
        else:
            pairs = pairs_from_aug_dir(ns.from_aug_dir, val_fraction=ns.val_fraction, seed=ns.seed)
            os.makedirs(ns.out_dir, exist_ok=True)
            write_pair_manifest(os.path.join(ns.out_dir, "pairs.json"), pairs)
        cfg = TrainConfig(
            batch_size=ns.batch_size,
            epochs=ns.epochs,
            seed=ns.seed,
            crop_frames=ns.crop_frames or None,
            min_train_pairs=ns.min_train_pairs,
        )
        ckpt = train(pairs, cfg, ns.out_dir)
    except (PairDataError, ValueError, OSError) as exc:
        print(f"unet-train: {exc}", file=sys.stderr)
        return 1
    curve = json.loads((ckpt.parent / "curve.json").read_text(encoding="utf-8"))
    print(
        json.dumps(
            {
                "checkpoint": str(ckpt),
                "curve": str(ckpt.parent / "curve.json"),
                "best_val_l1": curve["best_val_l1"],
                "baseline_val_l1": curve["baseline_val_l1"],
                "n_train_pairs": curve["n_train_pairs"],
                "n_val_pairs": curve["n_val_pairs"],
            },
            indent=2,
            sort_keys=True,
        )
    )
    return 0


def infer_main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="unet-infer",
        description="denoise one SPEC1 spectrogram (subprocess contract: "
        "unet-infer --checkpoint CKPT <input> <output>)",
    )
    parser.add_argument("--checkpoint", required=True)
    parser.add_argument("input")
    parser.add_argument("output")
    ns = parser.parse_args(argv)
    return infer(ns.input, ns.output, ns.checkpoint)


if __name__ == "__main__":
    sys.exit(train_main())
