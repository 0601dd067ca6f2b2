"""Command-line interface: render, bench, bake, verify, compare."""

from __future__ import annotations

import argparse
import json
import sys
import time

from .control import read_control_csv
from .engine import Model, RenderOptions, measure_rtf, render, render_streaming
from .errors import ControlCsvError, FormatError, NewtError, SchemaError
from .metrics import MrStftConfig, mr_stft_report
from .newt import bake_bank, bake_error_report
from .verify import run_verification
from .wav import read_wav, write_wav
from .weights import load_model_file, save_model_file

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_BAD_MODEL = 2
EXIT_BAD_CSV = 3

BUFFER_SWEEP = [2**n for n in range(8, 16)]
REPORT_SCHEMA_VERSION = 1


def _load_model(path):
    try:
        return Model.from_file(path)
    except (FormatError, SchemaError, OSError) as exc:
        print(f"error: cannot load model {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_BAD_MODEL)


def _load_track(path, hop_size):
    try:
        return read_control_csv(path, hop_size)
    except ControlCsvError as exc:
        where = f" (row {exc.row})" if exc.row else ""
        print(f"error: bad control file {path}{where}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_BAD_CSV)
    except OSError as exc:
        print(f"error: cannot read control file {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_BAD_CSV)


def cmd_render(args) -> int:
    model = _load_model(args.model)
    track = _load_track(args.control, model.config.hop_size)
    opts = RenderOptions(
        use_fastnewt=args.fastnewt,
        noise_seed=args.seed,
        enable_reverb=not args.no_reverb,
    )
    t0 = time.perf_counter()
    try:
        audio = render(model, track, opts)
    except (NewtError, ValueError) as exc:
        print(f"error: render failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    elapsed = time.perf_counter() - t0
    write_wav(args.output, audio, float32=args.float32)
    rtf = elapsed / audio.duration
    print(f"wrote {args.output}: {len(audio)} samples at {audio.sample_rate} Hz")
    print(f"render time {elapsed:.3f} s for {audio.duration:.3f} s audio (RTF {rtf:.3f})")
    return EXIT_OK


def cmd_bench(args) -> int:
    model = _load_model(args.model)
    variants = [("mlp", False)] if model.has_shapers else []
    if args.fastnewt or model.has_tables:
        if not model.has_tables:
            print("baking tables for the fastnewt variant", file=sys.stderr)
            model.tables = bake_bank(model.shapers)
        variants.append(("fastnewt", True))

    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "duration_seconds": args.duration,
        "runs": args.runs,
        "variants": {},
    }
    for name, fast in variants:
        stats = measure_rtf(
            model,
            duration=args.duration,
            opts=RenderOptions(use_fastnewt=fast),
            repetitions=args.runs,
            warmup=args.warmup,
        )
        report["variants"][name] = stats
        print(
            f"{name}: mean RTF {stats['mean_rtf']:.4f}, 90th percentile {stats['p90_rtf']:.4f}",
            file=sys.stderr,
        )

    if args.buffer_sweep:
        sweep = []
        for name, fast in variants:
            for block in BUFFER_SWEEP:
                stats = measure_rtf(
                    model,
                    duration=args.duration,
                    opts=RenderOptions(use_fastnewt=fast, block_size=block),
                    repetitions=args.runs,
                    warmup=args.warmup,
                    streaming=True,
                )
                sweep.append({"variant": name, "block_size": block, **stats})
        report["buffer_sweep"] = sweep

    text = json.dumps(report, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_bake(args) -> int:
    try:
        loaded = load_model_file(args.model)
    except (FormatError, SchemaError, OSError) as exc:
        print(f"error: cannot load model {args.model}: {exc}", file=sys.stderr)
        return EXIT_BAD_MODEL
    model = Model(loaded)
    if not model.has_shapers:
        print("model carries baked tables only; nothing to bake", file=sys.stderr)
        return EXIT_OK
    lo, hi = args.domain
    tables = bake_bank(model.shapers, table_size=args.table_size, domain=(lo, hi))
    report = bake_error_report(model.shapers, tables)
    for entry in report:
        print(
            f"channel {entry['channel']:3d}: max bake error {entry['max_abs_error']:.3e} "
            f"({entry['relative_error']:.3e} of output range)"
        )
    save_model_file(args.output, loaded.config, loaded.tensors, loaded.stats, tables)
    print(f"wrote {args.output} with {tables.n_channels} tables of {tables.table_size} samples")
    return EXIT_OK


def cmd_verify(args) -> int:
    results = run_verification(args.model)
    failures = 0
    for result in results:
        status = "ok" if result.ok else "FAIL"
        detail = f" - {result.detail}" if result.detail else ""
        print(f"{status}: {result.name}{detail}")
        failures += 0 if result.ok else 1
    if failures:
        print(f"{failures} verification failure(s)", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def cmd_compare(args) -> int:
    a = read_wav(args.reference)
    b = read_wav(args.estimate)
    if a.sample_rate != b.sample_rate:
        print("error: sample rates differ", file=sys.stderr)
        return EXIT_FAILURE
    if len(a) != len(b):
        print(f"error: lengths differ ({len(a)} vs {len(b)})", file=sys.stderr)
        return EXIT_FAILURE
    report = mr_stft_report(a, b, MrStftConfig())
    text = json.dumps(report, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="newt", description="Neural waveshaping synthesis engine"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("render", help="render a control CSV to a WAV file")
    p.add_argument("model")
    p.add_argument("control")
    p.add_argument("output")
    p.add_argument("--fastnewt", action="store_true", help="use baked lookup tables")
    p.add_argument("--seed", type=int, default=0, help="noise generator seed")
    p.add_argument("--no-reverb", action="store_true")
    p.add_argument("--float32", action="store_true", help="write IEEE float samples")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("bench", help="real-time factor benchmark")
    p.add_argument("model")
    p.add_argument("--duration", type=float, default=4.0)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--warmup", type=int, default=1)
    p.add_argument("--buffer-sweep", action="store_true")
    p.add_argument("--fastnewt", action="store_true", help="also bench the table variant")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("bake", help="bake lookup tables into a model file")
    p.add_argument("model")
    p.add_argument("output")
    p.add_argument("--table-size", type=int, default=4096)
    p.add_argument("--domain", type=float, nargs=2, default=(-3.0, 3.0), metavar=("LO", "HI"))
    p.set_defaults(func=cmd_bake)

    p = sub.add_parser("verify", help="run invariant checks against a model file")
    p.add_argument("model")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("compare", help="multi-resolution spectral comparison of two WAVs")
    p.add_argument("reference")
    p.add_argument("estimate")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
