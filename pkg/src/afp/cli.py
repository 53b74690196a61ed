"""The ``afp`` command line: index building/inspection, augmentation batches,
single queries, and benchmark runs.

Successful invocations print one JSON document on stdout (always including
the resolved seed); logs go to stderr.  Exit codes: 1 usage, 2 I/O,
3 corrupt index, 4 external denoiser failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .augment import AugmentConfig, Bank, augment_one, derive_item_seed
from .bench import BenchConfig, load_query_manifest, report_csv, report_json, run_benchmark
from .denoise import DenoiserKind, denoised_match, mix_query
from .dsp import StftConfig, resample, stft
from .errors import CorruptIndexError, ExternalDenoiserError
from .fingerprint import MatchResult, build_index, load_index, match_query, save_index
from .spec1 import write_spec1
from .wav import read_wav, write_wav

log = logging.getLogger("afp")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit 2; the contract is 1
        raise UsageError(message)


def _parse_denoiser(text: str, alpha: float, beta: float) -> DenoiserKind:
    if text == "none":
        return DenoiserKind.none()
    if text in ("spectral-sub", "spectral_sub"):
        return DenoiserKind.spectral_sub(alpha=alpha, beta=beta)
    if text.startswith("external:"):
        cmd = text[len("external:") :]
        if not cmd.strip():
            raise UsageError("external denoiser command is empty")
        return DenoiserKind.external(cmd)
    raise UsageError(f"unknown denoiser {text!r} (none | spectral-sub | external:\"cmd\")")


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError as exc:
        raise UsageError(f"bad numeric list {text!r}: {exc}") from exc


def _resolve_threads(value: int | None) -> int:
    if value is not None:
        return max(1, value)
    env = os.environ.get("AFP_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise UsageError(f"bad AFP_THREADS value {env!r}") from exc
    return os.cpu_count() or 1


def _active_defaults(parser: argparse.ArgumentParser, ns: argparse.Namespace) -> dict:
    """Defaults of every flag along the chosen subcommand chain."""
    out: dict = {}

    def walk(p: argparse.ArgumentParser):
        for action in p._actions:
            if isinstance(action, argparse._SubParsersAction):
                chosen = getattr(ns, action.dest, None)
                if chosen in action.choices:
                    walk(action.choices[chosen])
            elif action.dest != "help":
                out[action.dest] = action.default
    walk(parser)
    return out


def _apply_config_overlay(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    """Parse argv with an optional --config JSON overlay.

    Flags given on the command line win over config-file values; unknown
    config keys are rejected.
    """
    ns = parser.parse_args(argv)
    if getattr(ns, "config", None) is None:
        return ns
    with open(ns.config, "r", encoding="utf-8") as fh:
        overlay = json.load(fh)
    if not isinstance(overlay, dict):
        raise UsageError(f"config file {ns.config} must hold a JSON object")
    known = set(vars(ns))
    unknown = sorted(set(overlay) - known)
    if unknown:
        raise UsageError(f"unknown config keys: {unknown}")
    # Anything still at its subparser default was not given explicitly and
    # may be replaced by the overlay value.
    defaults = _active_defaults(parser, ns)
    explicit = {k for k, v in vars(ns).items() if k in defaults and defaults[k] != v}
    for key, value in overlay.items():
        if key not in explicit:
            setattr(ns, key, value)
    return ns


def _out_json(payload: dict) -> None:
    sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _match_payload(res: MatchResult, track_names: dict[int, tuple[str, int]], seed: int) -> dict:
    name = None
    if res.track_id is not None and res.track_id in track_names:
        name = track_names[res.track_id][0]
    return {
        "matched": res.matched,
        "track_id": res.track_id,
        "track_name": name,
        "score": res.score,
        "offset_frames": res.offset_frames,
        "runner_up_score": res.runner_up_score,
        "warning": res.warning,
        "seed": seed,
    }


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file with default values for this subcommand's flags")
    p.add_argument("--seed", type=int, default=0, help="master seed for all stochastic behavior")
    p.add_argument("--threads", type=int, default=None, help="worker threads (env AFP_THREADS, then CPU count)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="afp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_index = sub.add_parser("index", help="build or inspect a fingerprint index")
    index_sub = p_index.add_subparsers(dest="index_command", required=True)

    p_build = index_sub.add_parser("build", help="fingerprint a corpus into an index file")
    _add_common(p_build)
    p_build.add_argument("--manifest", required=True, help="JSON list of {path, track_id}")
    p_build.add_argument("--out", required=True, help="output .afpi path")
    p_build.add_argument("--profile", default="maxfilter", choices=["maxfilter", "envelope"])
    p_build.add_argument("--frame-size", type=int, default=512)
    p_build.add_argument("--hop-size", type=int, default=256)
    p_build.add_argument("--target-rate", type=int, default=11025)

    p_inspect = index_sub.add_parser("inspect", help="summarize an index file")
    _add_common(p_inspect)
    p_inspect.add_argument("--index", required=True)

    p_aug = sub.add_parser("augment", help="write degraded variants of a corpus")
    _add_common(p_aug)
    p_aug.add_argument("--manifest", required=True, help="JSON list of {path, track_id}")
    p_aug.add_argument("--noise", required=True, help="noise bank manifest JSON")
    p_aug.add_argument("--irs", required=True, help="impulse response bank manifest JSON")
    p_aug.add_argument("--out-dir", required=True)
    p_aug.add_argument("--count", type=int, default=1, help="variants per source file")
    p_aug.add_argument(
        "--spectrograms", action="store_true",
        help="also write clean/noisy SPEC1 magnitude spectrograms",
    )

    p_query = sub.add_parser("query", help="identify one audio snippet")
    _add_common(p_query)
    p_query.add_argument("--index", required=True)
    p_query.add_argument("--audio", required=True)
    p_query.add_argument("--denoiser", default="none")
    p_query.add_argument("--mix", action="store_true", help="dual raw+denoised query")
    p_query.add_argument("--min-score", type=int, default=4)
    p_query.add_argument("--alpha", type=float, default=2.0)
    p_query.add_argument("--beta", type=float, default=0.01)

    p_bench = sub.add_parser("bench", help="run the identification benchmark grid")
    _add_common(p_bench)
    p_bench.add_argument("--index", required=True)
    p_bench.add_argument("--queries", required=True, help="JSON list of {path, track_id}")
    p_bench.add_argument("--noise", default=None)
    p_bench.add_argument("--irs", default=None)
    p_bench.add_argument("--lengths", default="3,5,10", help="snippet lengths in seconds")
    p_bench.add_argument("--conditions", default="clean,noisy,denoised,mix")
    p_bench.add_argument("--denoiser", default="spectral-sub")
    p_bench.add_argument("--min-score", type=int, default=4)
    p_bench.add_argument("--alpha", type=float, default=2.0)
    p_bench.add_argument("--beta", type=float, default=0.01)
    p_bench.add_argument("--out", default=None, help="also write the JSON report here")
    p_bench.add_argument("--csv", default=None, help="write the id-rate grid as CSV here")
    return parser


def _cmd_index_build(ns) -> None:
    entries = load_query_manifest(ns.manifest)
    cfg = StftConfig(ns.frame_size, ns.hop_size, "hann", ns.target_rate)
    tracks = []
    names = {}
    for path, tid in entries:
        tracks.append((tid, read_wav(path)))
        names[tid] = Path(path).stem
    index = build_index(tracks, cfg, ns.profile, names, threads=_resolve_threads(ns.threads))
    save_index(index, ns.out)
    log.info("indexed %d tracks, %d entries -> %s", len(tracks), index.n_entries, ns.out)
    _out_json(
        {
            "command": "index build",
            "out": ns.out,
            "n_tracks": len(tracks),
            "n_entries": index.n_entries,
            "profile": ns.profile,
            "seed": ns.seed,
        }
    )


def _cmd_index_inspect(ns) -> None:
    index = load_index(ns.index)
    cfg = index.stft_config
    _out_json(
        {
            "command": "index inspect",
            "path": ns.index,
            "profile": index.peak_profile,
            "stft": {
                "frame_size": cfg.frame_size,
                "hop_size": cfg.hop_size,
                "window": cfg.window,
                "target_rate": cfg.target_rate,
            },
            "n_tracks": len(index.track_table),
            "n_entries": index.n_entries,
            "tracks": {
                str(tid): {"name": name, "n_frames": n_frames}
                for tid, (name, n_frames) in sorted(index.track_table.items())
            },
            "seed": ns.seed,
        }
    )


def _cmd_augment(ns) -> None:
    sources = load_query_manifest(ns.manifest)
    noise_bank = Bank.from_manifest(ns.noise)
    ir_bank = Bank.from_manifest(ns.irs)
    out_dir = Path(ns.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    aug_cfg = AugmentConfig()
    stft_cfg = StftConfig()
    outputs = []
    for src_idx, (path, _tid) in enumerate(sources):
        w = read_wav(path)
        if w.sample_rate != 44100:
            w = resample(w, 44100)
        stem = Path(path).stem
        if ns.spectrograms:
            clean_spec = stft(resample(w, stft_cfg.target_rate), stft_cfg)
            write_spec1(out_dir / f"{stem}.clean.spec1", clean_spec.values)
        for k in range(ns.count):
            item_seed = derive_item_seed(ns.seed, src_idx * ns.count + k)
            noisy, record = augment_one(w, aug_cfg, noise_bank, ir_bank, item_seed)
            wav_path = out_dir / f"{stem}.aug{k}.wav"
            write_wav(wav_path, noisy)
            (out_dir / f"{stem}.aug{k}.json").write_text(record.to_json() + "\n", encoding="utf-8")
            if ns.spectrograms:
                noisy_spec = stft(resample(noisy, stft_cfg.target_rate), stft_cfg)
                write_spec1(out_dir / f"{stem}.aug{k}.spec1", noisy_spec.values)
            outputs.append(wav_path.name)
    log.info("wrote %d augmented files to %s", len(outputs), out_dir)
    _out_json(
        {
            "command": "augment",
            "out_dir": str(out_dir),
            "n_sources": len(sources),
            "count": ns.count,
            "n_outputs": len(outputs),
            "spectrograms": bool(ns.spectrograms),
            "seed": ns.seed,
        }
    )


def _cmd_query(ns) -> None:
    index = load_index(ns.index)
    query = read_wav(ns.audio)
    denoiser = _parse_denoiser(ns.denoiser, ns.alpha, ns.beta)
    if denoiser.kind == "none":
        if ns.mix:
            raise UsageError("--mix needs a denoiser (use --denoiser spectral-sub or external:...)")
        res = match_query(index, query, ns.min_score)
    elif ns.mix:
        res = mix_query(index, query, denoiser, ns.min_score)
    else:
        res = denoised_match(index, query, denoiser, ns.min_score)
    payload = _match_payload(res, index.track_table, ns.seed)
    payload["command"] = "query"
    payload["audio"] = ns.audio
    _out_json(payload)


def _cmd_bench(ns) -> None:
    index = load_index(ns.index)
    queries = load_query_manifest(ns.queries)
    if isinstance(ns.conditions, str):
        conditions = tuple(c.strip() for c in ns.conditions.split(",") if c.strip())
    else:
        conditions = tuple(ns.conditions)
    lengths = _parse_floats(ns.lengths) if isinstance(ns.lengths, str) else tuple(
        float(x) for x in ns.lengths
    )
    noise_bank = Bank.from_manifest(ns.noise) if ns.noise else None
    ir_bank = Bank.from_manifest(ns.irs) if ns.irs else None
    denoiser = _parse_denoiser(ns.denoiser, ns.alpha, ns.beta)
    cfg = BenchConfig(
        lengths_s=lengths, conditions=conditions, seed=ns.seed, min_score=ns.min_score
    )
    report = run_benchmark(
        index,
        queries,
        noise_bank,
        ir_bank,
        denoiser=denoiser,
        cfg=cfg,
        threads=_resolve_threads(ns.threads),
    )
    text = report_json(report)
    if ns.out:
        Path(ns.out).write_text(text, encoding="utf-8")
    if ns.csv:
        Path(ns.csv).write_text(report_csv(report), encoding="utf-8")
    sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(name)s: %(message)s")
    parser = build_parser()
    try:
        ns = _apply_config_overlay(parser, list(sys.argv[1:] if argv is None else argv))
        log.info("resolved seed: %d", getattr(ns, "seed", 0))
        if ns.command == "index":
            if ns.index_command == "build":
                _cmd_index_build(ns)
            else:
                _cmd_index_inspect(ns)
        elif ns.command == "augment":
            _cmd_augment(ns)
        elif ns.command == "query":
            _cmd_query(ns)
        elif ns.command == "bench":
            _cmd_bench(ns)
        return 0
    except UsageError as exc:
        print(f"afp: usage error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"afp: invalid argument: {exc}", file=sys.stderr)
        return 1
    except CorruptIndexError as exc:
        print(f"afp: corrupt index: {exc}", file=sys.stderr)
        return 3
    except ExternalDenoiserError as exc:
        print(f"afp: external denoiser failed: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"afp: i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
