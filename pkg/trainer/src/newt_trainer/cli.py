"""Desk-scale training CLI: preprocess audio (or synthesize tones), train,
and export an engine-loadable weight file with fixtures and a loss curve."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import DESK_SHAPE, DatasetSpec, ModelShape, TrainConfig
from .data import load_audio, preprocess, write_loss_curve
from .export import export_model
from .features import harmonic_tone
from .train import train


def synthetic_signals(spec: DatasetSpec, seconds: float = 24.0, seed: int = 0):
    """A few minutes of vibrato tones with ground-truth pitch."""
    rng = np.random.default_rng(seed)
    signals = []
    for base in (196.0, 262.0, 330.0, 392.0):
        n = int(seconds / 4 * spec.sample_rate)
        t = np.arange(n) / spec.sample_rate
        f0 = base * (1.0 + 0.01 * np.sin(2 * np.pi * 5.0 * t)) * 2 ** (0.2 * np.sin(2 * np.pi * 0.15 * t))
        amp = 0.4 + 0.25 * np.sin(2 * np.pi * 0.5 * t + rng.uniform(0, 2 * np.pi))
        audio = harmonic_tone(n / spec.sample_rate, spec.sample_rate, f0, amp, seed=int(rng.integers(1 << 30)))
        frames = audio.size // spec.hop_size
        signals.append((audio, f0[: frames * spec.hop_size : spec.hop_size]))
    return signals


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="newt-train", description="Train a waveshaping synthesizer")
    parser.add_argument("--audio", nargs="*", default=[], help="input WAV files (default: synthetic tones)")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--steps", type=int, default=5000)
    parser.add_argument("--batch-size", type=int, default=8)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--full-size", action="store_true", help="paper-scale model instead of the desk-scale default")
    args = parser.parse_args(argv)

    spec = DatasetSpec()
    if args.audio:
        signals = [load_audio(path, spec.sample_rate) for path in args.audio]
    else:
        print("no audio given; synthesizing a small tone dataset", file=sys.stderr)
        signals = synthetic_signals(spec, seed=args.seed)
    dataset = preprocess(signals, spec)
    print(
        f"dataset: {len(dataset.train)} train / {len(dataset.validation)} val / "
        f"{len(dataset.test)} test segments",
        file=sys.stderr,
    )

    shape = ModelShape() if args.full_size else DESK_SHAPE
    config = TrainConfig(iterations=args.steps, batch_size=args.batch_size, seed=args.seed)
    result = train(dataset, shape, config)
    print(
        f"loss {result.initial_loss:.4f} -> {result.final_loss:.4f} over {args.steps} steps",
        file=sys.stderr,
    )

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_loss_curve(out_dir / "loss_curve.csv", result.history)
    paths = export_model(
        out_dir, result.model, result.stats_mean, result.stats_std, dataset.train[0], seed=args.seed
    )
    print(f"wrote {paths['model_path']}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
