"""Command-line interface: generate / inspect / validate / serve."""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from sigforge import dataset as ds
from sigforge import measurement
from sigforge.frame import FRAME_LEN
from sigforge.impairments import ImpairmentRecord, pre_noise_frame, synthesize_impaired_source
from sigforge.linear import matched_filter_symbols
from sigforge.registry import NUM_CLASSES, class_by_index
from sigforge.rng import RngStream
from sigforge.server import ServerDefaults, serve


def _default_workers() -> int:
    env = os.environ.get("SIGFORGE_WORKERS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            raise SystemExit(f"SIGFORGE_WORKERS must be an integer, got {env!r}")
    return 1


def _cmd_generate(args: argparse.Namespace) -> int:
    if args.count % NUM_CLASSES != 0:
        print(f"error: --count must be divisible by {NUM_CLASSES} "
              f"(exact class balance), got {args.count}", file=sys.stderr)
        return 2
    config = ds.DatasetConfig(
        variant=args.variant,
        examples_per_class=args.count // NUM_CLASSES,
        dataset_seed=args.seed,
        frame_len=args.frame_len,
    )
    workers = args.workers if args.workers is not None else _default_workers()
    try:
        manifest = ds.write_shards(config, args.out, workers=workers, force=args.force)
    except FileExistsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(manifest["digest_sha256"])
    return 0


def _cmd_inspect(args: argparse.Namespace) -> int:
    try:
        manifest = ds.load_manifest(args.in_dir)
        frame32, meta = ds.read_example(args.in_dir, args.index, manifest)
    except (FileNotFoundError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    frame = frame32.astype(np.complex128)
    if args.meta:
        print(json.dumps(meta, sort_keys=True, indent=2))
    if args.psd:
        measurement.psd_to_csv(measurement.welch_psd(frame), args.psd)
    if args.spec:
        measurement.spectrogram_to_pgm(measurement.spectrogram(frame), args.spec)
    if args.constellation:
        cls = class_by_index(meta["class_index"])
        if not cls.is_linear:
            print(f"error: --constellation needs a linear class, "
                  f"{cls.name} is {cls.family}", file=sys.stderr)
            return 1
        alpha = meta.get("shaping", {}).get("rrc_alpha", 0.35)
        _positions, soft = matched_filter_symbols(frame, alpha)
        with open(args.constellation, "w", encoding="utf-8") as fh:
            fh.write("i,q\n")
            for value in soft:
                fh.write(f"{value.real:.10g},{value.imag:.10g}\n")
    return 0


def _sample_indices(total: int, want: int) -> list[int]:
    if total <= want:
        return list(range(total))
    return sorted(set(np.linspace(0, total - 1, want).astype(int).tolist()))


def _cmd_validate(args: argparse.Namespace) -> int:
    failures = 0

    def report(name: str, ok: bool, detail: str = "") -> None:
        nonlocal failures
        if not ok:
            failures += 1
        suffix = f"  ({detail})" if detail else ""
        print(f"{name}: {'PASS' if ok else 'FAIL'}{suffix}")

    try:
        manifest = ds.load_manifest(args.in_dir)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        ds.verify_digests(args.in_dir, manifest)
        report("digest", True)
    except (ds.DigestMismatchError, FileNotFoundError) as exc:
        report("digest", False, str(exc))
        return 1  # everything downstream reads those bytes

    frame_len = manifest["config"]["frame_len"]
    total = manifest["num_examples"]
    counts = dict.fromkeys(range(NUM_CLASSES), 0)
    balanced = True
    position = 0
    for _frame, meta in ds.read(args.in_dir):
        counts[meta["class_index"]] += 1
        if meta["index"] != position or meta["class_index"] != position % NUM_CLASSES:
            balanced = False
        position += 1
    expected = manifest["config"]["examples_per_class"]
    balanced = balanced and position == total and all(
        counts[c] == expected for c in range(NUM_CLASSES))
    report("class-balance", balanced,
           f"{position} examples, {expected} per class expected")

    replay_ok, snr_ok, envelope_ok = True, True, True
    snr_checked = envelope_checked = 0
    worst_snr = 0.0
    for index in _sample_indices(total, args.sample):
        frame32, meta = ds.read_example(args.in_dir, index, manifest)
        replayed = ds.replay_example(meta, frame_len)
        if ds.frame_to_bytes(replayed) != frame32.astype(np.complex64).tobytes():
            replay_ok = False
        if "record" in meta:
            record = ImpairmentRecord.from_dict(meta["record"])
            awgn = next((s for s in record.steps if s.kind == "awgn"), None)
            if awgn is not None:
                rng = RngStream(int(meta["rng_key"]))
                source, _d, _s = synthesize_impaired_source(
                    meta["class_index"], rng, frame_len)
                signal = pre_noise_frame(source, record)
                noise = replayed - signal
                measured = measurement.measure_esn0(
                    signal, noise, awgn.params["samples_per_symbol"])
                error = abs(measured - record.target_esn0_db)
                worst_snr = max(worst_snr, error)
                snr_checked += 1
                if error > 0.2:
                    snr_ok = False
        elif meta["family"] == "fsk":
            # stored values are float32, so allow the rounding budget
            envelope_checked += 1
            if measurement.envelope_constancy(frame32.astype(np.complex128)) > 1e-6:
                envelope_ok = False
    report("replay", replay_ok, f"{len(_sample_indices(total, args.sample))} sampled")
    if snr_checked:
        report("snr-calibration", snr_ok,
               f"{snr_checked} sampled, worst |error| {worst_snr:.3f} dB")
    if envelope_checked:
        report("fsk-envelope", envelope_ok, f"{envelope_checked} sampled")

    return 1 if failures else 0


def _cmd_serve(args: argparse.Namespace) -> int:
    defaults = ServerDefaults(variant=args.variant, seed=args.seed,
                              frame_len=args.frame_len, batch_size=args.batch_size)
    print(f"serving on {args.host}:{args.port}", flush=True)
    try:
        serve(args.host, args.port, defaults)
    except KeyboardInterrupt:
        pass
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sigforge",
                                     description="Deterministic RF modulation dataset engine")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a dataset to disk")
    gen.add_argument("--variant", required=True, choices=ds.VARIANTS)
    gen.add_argument("--count", required=True, type=int,
                     help=f"total examples; must be divisible by {NUM_CLASSES}")
    gen.add_argument("--out", required=True)
    gen.add_argument("--seed", required=True, type=int)
    gen.add_argument("--workers", type=int, default=None,
                     help="parallel generators (default: $SIGFORGE_WORKERS or 1)")
    gen.add_argument("--frame-len", type=int, default=FRAME_LEN)
    gen.add_argument("--force", action="store_true",
                     help="write into a non-empty directory")
    gen.set_defaults(func=_cmd_generate)

    ins = sub.add_parser("inspect", help="export views of one stored example")
    ins.add_argument("--in", dest="in_dir", required=True)
    ins.add_argument("--index", required=True, type=int)
    ins.add_argument("--psd", help="write Welch PSD CSV here")
    ins.add_argument("--spec", help="write spectrogram PGM here")
    ins.add_argument("--constellation",
                     help="write symbol-rate IQ CSV here (linear classes)")
    ins.add_argument("--meta", action="store_true", help="print stored metadata")
    ins.set_defaults(func=_cmd_inspect)

    val = sub.add_parser("validate", help="integrity checks on a dataset dir")
    val.add_argument("--in", dest="in_dir", required=True)
    val.add_argument("--sample", type=int, default=20,
                     help="examples to replay/measure (default 20)")
    val.set_defaults(func=_cmd_validate)

    srv = sub.add_parser("serve", help="run the online batch server")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", required=True, type=int)
    srv.add_argument("--variant", default="impaired-train", choices=ds.VARIANTS)
    srv.add_argument("--seed", type=int, default=0)
    srv.add_argument("--frame-len", type=int, default=FRAME_LEN)
    srv.add_argument("--batch-size", type=int, default=32,
                     help="default batch size when a request omits it")
    srv.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
