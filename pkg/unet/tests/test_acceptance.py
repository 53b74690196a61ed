"""Secondary-component acceptance: toy training beats the no-model baseline,
and the inference binary conforms to the fingerprinting toolkit's external
denoiser protocol end to end.

Run with ``pytest tests/test_acceptance.py -v -s``.
"""

import json
import subprocess
import sys
import time

import pytest

from unet_denoiser.data import pairs_from_aug_dir
from unet_denoiser.train import TrainConfig, train

from conftest import toy_melody, toy_ir, toy_noise, write_pcm16_wav

TRAIN_BUDGET_S = 1800.0


def report_line(criterion: int, ok: bool, detail: str):
    status = "PASS" if ok else "FAIL"
    print(f"\nACCEPTANCE {criterion}: {status} — {detail}")
    assert ok, f"criterion {criterion}: {detail}"


@pytest.fixture(scope="session")
def toy_500_pairs(tmp_path_factory):
    """500 clean/noisy pairs written by the augment CLI (50 songs x 10)."""
    root = tmp_path_factory.mktemp("toy500")
    tracks = []
    for i in range(50):
        p = root / f"song{i:02d}.wav"
        write_pcm16_wav(p, toy_melody(500 + i), 44100)
        tracks.append({"path": p.name, "track_id": i})
    (root / "tracks.json").write_text(json.dumps(tracks))
    noise = []
    for i in range(6):
        p = root / f"noise{i}.wav"
        write_pcm16_wav(p, toy_noise(i), 44100)
        noise.append({"path": p.name, "class": "scene", "split": "train"})
    (root / "noise.json").write_text(json.dumps(noise))
    irs = []
    for i in range(3):
        p = root / f"ir{i}.wav"
        write_pcm16_wav(p, toy_ir(i), 32000)
        irs.append({"path": p.name, "class": "", "split": ""})
    (root / "irs.json").write_text(json.dumps(irs))
    out_dir = root / "pairs"
    res = subprocess.run(
        [
            sys.executable, "-m", "afp", "augment",
            "--manifest", str(root / "tracks.json"),
            "--noise", str(root / "noise.json"),
            "--irs", str(root / "irs.json"),
            "--out-dir", str(out_dir),
            "--count", "10",
            "--seed", "13",
            "--spectrograms",
        ],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0, res.stderr
    return out_dir


@pytest.fixture(scope="session")
def toy_training(toy_500_pairs, tmp_path_factory):
    out_dir = tmp_path_factory.mktemp("toy_ckpt")
    pairs = pairs_from_aug_dir(toy_500_pairs, val_fraction=0.1, seed=1)
    t0 = time.time()
    ckpt = train(pairs, TrainConfig(epochs=3, seed=1), out_dir)
    elapsed = time.time() - t0
    curve = json.loads((out_dir / "curve.json").read_text())
    return ckpt, curve, elapsed


def test_criterion_9_toy_training_beats_baseline(toy_training):
    ckpt, curve, elapsed = toy_training
    n_pairs = curve["n_train_pairs"] + curve["n_val_pairs"]
    ok = (
        n_pairs == 500
        and elapsed < TRAIN_BUDGET_S
        and curve["best_val_l1"] < curve["baseline_val_l1"]
    )
    report_line(
        9,
        ok,
        f"{n_pairs} pairs, trained in {elapsed:.0f}s (< {TRAIN_BUDGET_S:.0f}): "
        f"val L1 {curve['best_val_l1']:.4f} vs no-model baseline "
        f"{curve['baseline_val_l1']:.4f}",
    )


@pytest.fixture(scope="session")
def afp_index(tmp_path_factory):
    root = tmp_path_factory.mktemp("afp_db")
    manifest = []
    for i in range(8):
        p = root / f"track{i}.wav"
        write_pcm16_wav(p, toy_melody(900 + i, seconds=8.0), 44100)
        manifest.append({"path": p.name, "track_id": i})
    (root / "tracks.json").write_text(json.dumps(manifest))
    res = subprocess.run(
        [
            sys.executable, "-m", "afp", "index", "build",
            "--manifest", str(root / "tracks.json"),
            "--out", str(root / "db.afpi"),
        ],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0, res.stderr
    return root


def test_criterion_10_protocol_conformance(toy_training, afp_index, tmp_path):
    ckpt, _, _ = toy_training
    query = afp_index / "track3.wav"

    good = subprocess.run(
        [
            sys.executable, "-m", "afp", "query",
            "--index", str(afp_index / "db.afpi"),
            "--audio", str(query),
            "--denoiser", f"external:unet-infer --checkpoint {ckpt}",
            "--mix",
        ],
        capture_output=True,
        text=True,
    )
    good_payload = json.loads(good.stdout) if good.returncode == 0 else {}
    end_to_end_ok = (
        good.returncode == 0
        and good_payload.get("matched") is True
        and good_payload.get("track_id") == 3
        and good_payload.get("warning") is None
    )

    corruptor = tmp_path / "corrupt_infer.py"
    corruptor.write_text(
        "#!/usr/bin/env python3\n"
        '"""Runs the real inference, then drops the last frame of the output."""\n'
        "import subprocess, struct, sys\n"
        "import numpy as np\n"
        f"rc = subprocess.run(['unet-infer', '--checkpoint', {str(ckpt)!r},\n"
        "                     sys.argv[1], sys.argv[2]]).returncode\n"
        "if rc:\n"
        "    sys.exit(rc)\n"
        "data = open(sys.argv[2], 'rb').read()\n"
        "bins, frames = struct.unpack('<II', data[5:13])\n"
        "vals = np.frombuffer(data[13:], dtype='<f4').reshape(bins, frames)[:, :-1]\n"
        "with open(sys.argv[2], 'wb') as fh:\n"
        "    fh.write(b'SPEC1' + struct.pack('<II', bins, frames - 1) + vals.tobytes())\n"
    )
    bad = subprocess.run(
        [
            sys.executable, "-m", "afp", "query",
            "--index", str(afp_index / "db.afpi"),
            "--audio", str(query),
            "--denoiser", f"external:{sys.executable} {corruptor}",
            "--mix",
        ],
        capture_output=True,
        text=True,
    )
    bad_payload = json.loads(bad.stdout) if bad.returncode == 0 else {}
    degrade_ok = (
        bad.returncode == 0
        and bad_payload.get("matched") is True
        and bad_payload.get("track_id") == 3
        and bad_payload.get("warning") is not None
        and "raw path only" in bad_payload.get("warning", "")
    )
    ok = end_to_end_ok and degrade_ok
    report_line(
        10,
        ok,
        f"unet-infer mix query end-to-end: {end_to_end_ok} "
        f"(score {good_payload.get('score')}); shape-corrupting binary degrades "
        f"to raw with warning: {degrade_ok}",
    )
