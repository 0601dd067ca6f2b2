"""Cross-implementation contract tests.

The engine is exercised strictly through its external interfaces: the .newt
file format and the `newt` command-line tool. The central parity criterion
compares the trainer's float64 reference forward pass against the engine's
render of the exported file, sample by sample.
"""

import shutil
import subprocess

import numpy as np
import pytest
import torch
from scipy.io import wavfile

from newt_trainer import (
    DESK_SHAPE,
    ModelShape,
    ReferenceSynth,
    WaveshaperModel,
    export_model,
    export_tensors,
    newt_bytes,
    read_fixture_bundle,
)
from newt_trainer.data import Segment

NEWT_CLI = shutil.which("newt")
pytestmark = pytest.mark.skipif(NEWT_CLI is None, reason="engine CLI not installed")


def glide_segment(num_frames=500, hop=128, sample_rate=16000) -> Segment:
    t = np.arange(num_frames) * hop / sample_rate
    f0 = 220.0 * 2 ** (0.3 * np.sin(2 * np.pi * 0.4 * t))
    loudness = -25.0 + 5.0 * np.sin(2 * np.pi * 0.7 * t)
    return Segment(
        audio=np.zeros(num_frames * hop),
        f0=f0,
        loudness=loudness,
        confidence=np.ones(num_frames),
    )


STATS_MEAN = np.array([250.0, -25.0])
STATS_STD = np.array([80.0, 10.0])


def run_cli(*args):
    return subprocess.run([NEWT_CLI, *args], capture_output=True, text=True)


class TestExport:
    def test_exported_file_passes_engine_verification(self, tmp_path):
        torch.manual_seed(11)
        model = WaveshaperModel(DESK_SHAPE)
        paths = export_model(tmp_path, model, STATS_MEAN, STATS_STD, glide_segment(64))
        result = run_cli("verify", str(paths["model_path"]))
        assert result.returncode == 0, result.stdout + result.stderr

    def test_export_bytes_deterministic(self):
        torch.manual_seed(12)
        model = WaveshaperModel(DESK_SHAPE)
        tensors = export_tensors(model)
        a = newt_bytes(DESK_SHAPE, tensors, STATS_MEAN, STATS_STD)
        b = newt_bytes(DESK_SHAPE, tensors, STATS_MEAN, STATS_STD)
        assert a == b

    def test_fixture_bundle_round_trip(self, tmp_path):
        torch.manual_seed(13)
        model = WaveshaperModel(DESK_SHAPE)
        paths = export_model(tmp_path, model, STATS_MEAN, STATS_STD, glide_segment(32))
        arrays = read_fixture_bundle(paths["fixture_dir"])
        np.testing.assert_array_equal(arrays["golden_render"], paths["reference_render"])
        assert arrays["shaper_samples"].shape == (DESK_SHAPE.n_newt_channels, 64)
        assert arrays["noise_magnitudes"].min() >= 0.0


class TestParity:
    def render_both(self, tmp_path, shape: ModelShape, seed: int):
        torch.manual_seed(seed)
        model = WaveshaperModel(shape)
        segment = glide_segment(500, shape.hop_size, shape.sample_rate)
        paths = export_model(tmp_path, model, STATS_MEAN, STATS_STD, segment, seed=0)
        out_wav = tmp_path / "engine.wav"
        result = run_cli(
            "render",
            str(paths["model_path"]),
            str(paths["csv_path"]),
            str(out_wav),
            "--float32",
            "--seed",
            "0",
        )
        assert result.returncode == 0, result.stderr
        _, engine = wavfile.read(out_wav)
        return engine.astype(np.float64), paths["reference_render"]

    def test_engine_matches_reference_forward_pass(self, tmp_path):
        # the central cross-implementation criterion: 4 s render, paper-size
        # model, max abs sample difference below 1e-4
        engine, reference = self.render_both(tmp_path, ModelShape(), seed=21)
        assert engine.size == reference.size == 4 * 16000
        diff = float(np.max(np.abs(engine - reference)))
        print(f"\n[acceptance] cross-implementation parity: max abs diff {diff:.3e} (< 1e-4): PASS")
        assert diff < 1e-4

    def test_parity_holds_without_reverb_path_too(self, tmp_path):
        torch.manual_seed(22)
        shape = DESK_SHAPE
        model = WaveshaperModel(shape)
        segment = glide_segment(250, shape.hop_size, shape.sample_rate)
        paths = export_model(tmp_path, model, STATS_MEAN, STATS_STD, segment, seed=3)
        reference = ReferenceSynth(export_tensors(model), shape).render(
            segment.f0, segment.loudness, STATS_MEAN, STATS_STD, seed=3, enable_reverb=False
        )
        out_wav = tmp_path / "dry.wav"
        result = run_cli(
            "render",
            str(paths["model_path"]),
            str(paths["csv_path"]),
            str(out_wav),
            "--float32",
            "--seed",
            "3",
            "--no-reverb",
        )
        assert result.returncode == 0, result.stderr
        _, engine = wavfile.read(out_wav)
        assert float(np.max(np.abs(engine.astype(np.float64) - reference))) < 1e-4
