"""Acceptance suite: every criterion at its stated tolerance.

Each test prints one `[acceptance] <criterion>: PASS` line (visible with
pytest -s); a failed assertion marks the criterion FAIL.
"""

import time

import numpy as np
import pytest
from numpy.polynomial import chebyshev

from newtsynth import (
    ModelConfig,
    RenderOptions,
    apply_reverb,
    bake_error_report,
    fft_convolve,
    harmonic_peak_set,
    log_magnitude_distance,
    mr_stft_loss,
    parameter_count,
    render,
    render_streaming,
    spectral_convergence,
    synthetic_track,
)
from newtsynth.dsp import stft_magnitude
from newtsynth.engine import measure_rtf
from newtsynth.exciter import render_exciter
from newtsynth.newt import AffineParams, FastNewtTableBank, newt_forward
from newtsynth.noise import design_fir
from newtsynth.reverb import ReverbIr

SR = 16000
BUFFER_SIZES = [2**n for n in range(8, 16)]


def constant_affine_params(num_frames, n_channels):
    """Identity wrapping: unit gains, zero biases."""
    shape = (num_frames, n_channels)
    return AffineParams(
        in_gain=np.ones(shape),
        in_bias=np.zeros(shape),
        out_gain=np.ones(shape),
        out_bias=np.zeros(shape),
    )


def report(name):
    print(f"\n[acceptance] {name}: PASS")


class TestStreamingCausality:
    def test_streaming_identical_across_buffer_sweep(self, fixture_model):
        track = synthetic_track(500)  # 4 s at 16 kHz, hop 128
        started = time.perf_counter()
        reference = render(fixture_model, track)
        for block in BUFFER_SIZES:
            streamed = render_streaming(fixture_model, track, RenderOptions(block_size=block))
            diff = np.max(np.abs(streamed.samples - reference.samples))
            assert diff == 0.0, f"block {block}: max abs diff {diff}"
        elapsed = time.perf_counter() - started
        assert elapsed < 60.0, f"sweep took {elapsed:.1f} s"
        report(f"streaming sample-identical for all buffer sizes {BUFFER_SIZES} ({elapsed:.1f} s)")


class TestRealTimePerformance:
    def test_mean_rtf_under_one_for_both_variants(self, fixture_model):
        runs = 100
        mlp = measure_rtf(
            fixture_model, duration=4.0, opts=RenderOptions(use_fastnewt=False),
            repetitions=runs, warmup=1,
        )
        fast = measure_rtf(
            fixture_model, duration=4.0, opts=RenderOptions(use_fastnewt=True),
            repetitions=runs, warmup=1,
        )
        assert mlp["mean_rtf"] < 1.0
        assert fast["mean_rtf"] < 1.0
        assert fast["mean_rtf"] <= mlp["mean_rtf"]
        report(
            "real-time factor over %d runs: mlp mean %.3f (p90 %.3f), "
            "fastnewt mean %.3f (p90 %.3f)"
            % (runs, mlp["mean_rtf"], mlp["p90_rtf"], fast["mean_rtf"], fast["p90_rtf"])
        )


class TestFastNewtFidelity:
    def test_variant_loss_and_bake_error(self, fixture_model):
        assert fixture_model.tables.table_size == 4096
        assert (fixture_model.tables.lo, fixture_model.tables.hi) == (-3.0, 3.0)

        track = synthetic_track(500)
        mlp_render = render(fixture_model, track, RenderOptions(use_fastnewt=False))
        fast_render = render(fixture_model, track, RenderOptions(use_fastnewt=True))
        loss = mr_stft_loss(mlp_render.samples, fast_render.samples)
        assert loss < 0.1

        errors = bake_error_report(fixture_model.shapers, fixture_model.tables, probe_factor=16)
        worst = max(entry["relative_error"] for entry in errors)
        assert np.isfinite(worst)
        assert worst < 1e-2
        report(
            f"fastnewt fidelity: variant loss {loss:.5f} (< 0.1), "
            f"worst relative bake error {worst:.2e} (< 1e-2)"
        )


class TestDspOracles:
    def test_convolution_matches_brute_force(self):
        rng = np.random.default_rng(2024)
        worst = 0.0
        for _ in range(100):
            x = rng.standard_normal(rng.integers(8, 257))
            h = rng.standard_normal(rng.integers(1, 129))
            worst = max(worst, float(np.max(np.abs(fft_convolve(x, h) - np.convolve(x, h)))))
        assert worst < 1e-5

        for _ in range(100):
            x = rng.standard_normal(512)
            c = np.zeros(256)
            c[1:] = rng.standard_normal(255) * 0.2
            got, _ = apply_reverb(x, ReverbIr(c), partition=128)
            want = x + np.convolve(x, c)[:512]
            worst = max(worst, float(np.max(np.abs(got - want))))
        assert worst < 1e-5

        # bins 1 and 127 sit inside the Hann mainlobe of their DC/Nyquist
        # mirror image, so the smeared peak lands on the mirror; every other
        # bin round-trips exactly
        for bin_index in [0] + list(range(2, 127)) + [128]:
            mag = np.zeros(129)
            mag[bin_index] = 1.0
            ir = design_fir(mag)
            assert np.abs(np.fft.rfft(ir, 256)).argmax() == bin_index
        report(f"dsp oracle equivalence: 200 convolutions, worst error {worst:.2e} (< 1e-5)")


class TestWaveshapingTheory:
    def test_chebyshev_transposition_and_nyquist_mask(self):
        f0 = 400.0
        n = np.arange(2 * SR)
        cosine = np.cos(2 * np.pi * f0 * n / SR)[None, :]
        num_frames = cosine.shape[1] // 128
        grid = np.linspace(-3.0, 3.0, 4096)
        dominances = {}
        for k in (2, 3, 4, 5):
            coeffs = np.zeros(k + 1)
            coeffs[k] = 1.0
            tables = FastNewtTableBank(chebyshev.chebval(grid, coeffs)[None, :], -3.0, 3.0)
            params = constant_affine_params(num_frames, 1)
            shaped = newt_forward(cosine, params, tables, hop_size=128)
            assert harmonic_peak_set(shaped, f0, SR, max_k=10) == {k}
            spec = stft_magnitude(shaped, 2048, 512).magnitudes.mean(axis=0)
            peak = spec[round(k * f0 * 2048 / SR)]
            residual = spec[round(f0 * 2048 / SR) - 1 : round(f0 * 2048 / SR) + 2].max()
            dominance = 20 * np.log10(peak / residual)
            assert dominance >= 40.0
            dominances[k] = dominance

        # masked exciter: no energy at or above Nyquist
        weights = np.ones((1, 101)) / 20.0
        out, _ = render_exciter(np.full(4 * SR, 1000.0), weights, np.zeros(1), SR)
        assert harmonic_peak_set(out[0], 1000.0, SR, max_k=16) == {1, 2, 3, 4, 5, 6, 7}
        report(
            "waveshaping theory: harmonic transposition dominance "
            + ", ".join(f"T{k} {v:.0f} dB" for k, v in dominances.items())
            + " (>= 40 dB); exciter truncates at Nyquist"
        )


class TestLossIdentities:
    def test_analytic_loss_values(self):
        rng = np.random.default_rng(4321)
        n = np.arange(4 * SR)
        x = (
            0.4 * np.cos(2 * np.pi * 330.0 * n / SR)
            + 0.2 * np.cos(2 * np.pi * 990.0 * n / SR)
            + 0.05 * rng.standard_normal(n.size)
        )
        m = 1024
        assert spectral_convergence(x, x, m) == 0.0
        half = spectral_convergence(x, 0.5 * x, m)
        assert abs(half - 0.5) < 1e-6

        spec = stft_magnitude(x, m, m // 4)
        assert spec.magnitudes.min() > 1e-6  # safely above the epsilon floor
        expected = spec.magnitudes.size * np.log(2.0) / m
        got = log_magnitude_distance(x, 2.0 * x, m)
        assert abs(got - expected) < 1e-6
        report(
            f"loss identities: L_sc(x,x)=0, L_sc(x,0.5x)={half:.8f}, "
            f"L_m(x,2x)={got:.6f} (analytic {expected:.6f})"
        )


class TestModelShape:
    def test_parameter_count_within_tolerance(self):
        count = parameter_count(ModelConfig())
        assert abs(count - 266_000) / 266_000 < 0.05
        report(f"model shape: {count} parameters (266k +/- 5%)")
