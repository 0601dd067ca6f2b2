import numpy as np
import pytest

from newtsynth.dsp import hann_window, stft_magnitude
from newtsynth.mlp import ControlMlp, MlpLayer
from newtsynth.noise import (
    NoiseFilterMlp,
    NoiseRenderer,
    NoiseState,
    design_fir,
    magnitude_map,
    render_noise,
)

TAPS = 256
BINS = TAPS // 2 + 1
HOP = 128
SR = 16000


class TestMagnitudeMap:
    def test_bounded_and_positive(self, rng):
        x = rng.standard_normal(1000) * 20
        m = magnitude_map(x)
        assert np.all(m > 0)
        assert np.all(m <= 2.0)

    def test_monotone(self):
        x = np.linspace(-10, 10, 100)
        assert np.all(np.diff(magnitude_map(x)) > 0)


class TestNoiseMlp:
    def build(self, rng, out_bias_value):
        hidden = [
            MlpLayer(
                rng.standard_normal((16, 8)) * 0.3,
                np.zeros(16),
                np.ones(16),
                np.zeros(16),
            )
        ]
        return NoiseFilterMlp(
            ControlMlp(hidden, np.zeros((BINS, 16)), np.full(BINS, out_bias_value))
        )

    def test_zero_weights_give_flat_response(self, rng):
        mlp = self.build(rng, out_bias_value=0.0)
        mags = mlp.forward(rng.standard_normal((4, 8)))
        expected = magnitude_map(0.0)
        np.testing.assert_allclose(mags, np.full((4, BINS), expected))

    def test_outputs_nonnegative(self, rng):
        mlp = self.build(rng, out_bias_value=-3.0)
        mags = mlp.forward(rng.standard_normal((10, 8)) * 5)
        assert np.all(mags >= 0)

    def test_identical_frames_identical_responses(self, rng):
        mlp = self.build(rng, out_bias_value=0.5)
        z = np.tile(rng.standard_normal(8), (2, 1))
        mags = mlp.forward(z)
        np.testing.assert_array_equal(mags[0], mags[1])

    def test_matches_torch_reference(self, rng):
        torch = pytest.importorskip("torch")
        hidden = MlpLayer(
            rng.standard_normal((16, 8)) * 0.4,
            rng.standard_normal(16) * 0.1,
            rng.uniform(0.5, 1.5, 16),
            rng.standard_normal(16) * 0.1,
        )
        out_w = rng.standard_normal((BINS, 16)) * 0.2
        out_b = rng.standard_normal(BINS) * 0.5
        mlp = NoiseFilterMlp(ControlMlp([hidden], out_w, out_b))

        linear = torch.nn.Linear(8, 16).double()
        norm = torch.nn.LayerNorm(16).double()
        out_linear = torch.nn.Linear(16, BINS).double()
        with torch.no_grad():
            linear.weight.copy_(torch.from_numpy(hidden.weight))
            linear.bias.copy_(torch.from_numpy(hidden.bias))
            norm.weight.copy_(torch.from_numpy(hidden.ln_gain))
            norm.bias.copy_(torch.from_numpy(hidden.ln_bias))
            out_linear.weight.copy_(torch.from_numpy(out_w))
            out_linear.bias.copy_(torch.from_numpy(out_b))
        z = rng.standard_normal((6, 8))
        with torch.no_grad():
            logits = out_linear(torch.relu(norm(linear(torch.from_numpy(z)))))
            want = 2.0 * torch.sigmoid(logits) ** np.log(10.0)
        got = mlp.forward(z)
        assert np.max(np.abs(got - want.numpy())) < 1e-5


class TestDesignFir:
    def test_flat_magnitude_gives_windowed_delta(self):
        ir = design_fir(np.ones(BINS))
        window = hann_window(TAPS)
        assert ir[TAPS // 2] == pytest.approx(window[TAPS // 2], abs=1e-12)
        off_center = np.delete(ir, TAPS // 2)
        assert np.max(np.abs(off_center)) < 1e-12

    def test_zero_magnitude_gives_zero_ir(self):
        np.testing.assert_array_equal(design_fir(np.zeros(BINS)), np.zeros(TAPS))

    def test_single_bin_round_trips_to_peak(self):
        mag = np.zeros(BINS)
        mag[8] = 1.0
        ir = design_fir(mag)
        response = np.abs(np.fft.rfft(ir, TAPS))
        assert response.argmax() == 8

    def test_zero_phase_core_is_symmetric(self, rng):
        # before windowing the rotated impulse is exactly linear phase
        mag = rng.uniform(0, 2, BINS)
        core = np.roll(np.fft.irfft(mag, TAPS), TAPS // 2)
        d = np.arange(1, TAPS // 2)
        assert np.max(np.abs(core[TAPS // 2 + d] - core[TAPS // 2 - d])) < 1e-6
        ir = design_fir(mag)
        np.testing.assert_allclose(ir, core * hann_window(TAPS), atol=1e-15)


class TestRenderNoise:
    def test_zero_bank_renders_silence(self):
        state = NoiseState.initial(TAPS, seed=1)
        out, _ = render_noise(np.zeros((10, BINS)), HOP, state)
        np.testing.assert_array_equal(out, np.zeros(10 * HOP))

    def test_output_length(self):
        state = NoiseState.initial(TAPS, seed=1)
        out, _ = render_noise(np.ones((23, BINS)), HOP, state)
        assert out.size == 23 * HOP

    def test_determinism_per_seed(self):
        bank = np.ones((20, BINS))
        out1, _ = render_noise(bank, HOP, NoiseState.initial(TAPS, seed=42))
        out2, _ = render_noise(bank, HOP, NoiseState.initial(TAPS, seed=42))
        out3, _ = render_noise(bank, HOP, NoiseState.initial(TAPS, seed=43))
        np.testing.assert_array_equal(out1, out2)
        assert np.any(out1 != out3)

    def test_streaming_equals_one_shot(self, rng):
        bank = rng.uniform(0, 1.5, (64, BINS))
        renderer = NoiseRenderer(HOP, TAPS)
        whole, _ = renderer.render(bank, renderer.initial_state(5))
        state = renderer.initial_state(5)
        parts = []
        for start in range(0, 64, 16):
            block, state = renderer.render(bank[start : start + 16], state)
            parts.append(block)
        np.testing.assert_array_equal(np.concatenate(parts), whole)

    def test_flat_response_is_statistically_white(self):
        # per-bin average magnitude within 3 dB of the mean over >= 100 frames
        bank = np.ones((300, BINS))
        out, _ = render_noise(bank, HOP, NoiseState.initial(TAPS, seed=9))
        spec = stft_magnitude(out, 1024, 256)
        assert spec.num_frames >= 100
        profile = spec.magnitudes.mean(axis=0)
        deviation_db = 20 * np.log10(profile / profile.mean())
        assert np.max(np.abs(deviation_db)) < 3.0

    def test_lowpass_response_suppresses_stopband(self):
        # zero every bin above taps/4 (that is, above sr/4)
        mag = np.ones(BINS)
        mag[TAPS // 4 + 1 :] = 0.0
        out, _ = render_noise(np.tile(mag, (400, 1)), HOP, NoiseState.initial(TAPS, seed=123))
        spec = stft_magnitude(out, 1024, 256)
        power = (spec.magnitudes**2).mean(axis=0)
        freqs = np.fft.rfftfreq(1024, 1.0 / SR)
        passband = power[freqs <= SR / 4].sum()
        # measured strictly above the cutoff the Hann transition band caps
        # rejection near -24 dB for a 256-tap design
        strict = power[freqs > SR / 4].sum()
        assert 10 * np.log10(strict / passband) < -20.0
        # past one mainlobe width of transition the stopband is far below -30 dB
        guard = SR / 4 + 4 * SR / TAPS
        stopband = power[freqs > guard].sum()
        assert 10 * np.log10(stopband / passband) < -30.0
