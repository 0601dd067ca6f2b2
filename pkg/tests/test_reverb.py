import numpy as np
import pytest

from newtsynth.reverb import ReverbConvolver, ReverbIr, apply_reverb, init_reverb_ir


def make_ir(values):
    return ReverbIr(c=np.asarray(values, dtype=float))


class TestReverbIr:
    def test_nonzero_head_rejected(self):
        with pytest.raises(ValueError):
            make_ir([0.1, 0.0])

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            make_ir([0.0, np.nan])


class TestInitReverbIr:
    def test_head_is_zero(self):
        assert init_reverb_ir(1000, seed=5).c[0] == 0.0

    def test_same_seed_same_ir(self):
        a = init_reverb_ir(4096, seed=11)
        b = init_reverb_ir(4096, seed=11)
        np.testing.assert_array_equal(a.c, b.c)
        c = init_reverb_ir(4096, seed=12)
        assert np.any(a.c != c.c)

    def test_tail_variance_near_1e_minus_6(self):
        ir = init_reverb_ir(32000, seed=0)
        variance = ir.c[1:].var()
        assert abs(variance - 1e-6) < 0.2e-6

    def test_zero_length_rejected(self):
        with pytest.raises(ValueError):
            init_reverb_ir(0, seed=0)


class TestApplyReverb:
    def test_zero_ir_is_exact_passthrough(self, rng):
        x = rng.standard_normal(1024)
        out, _ = apply_reverb(x, make_ir(np.zeros(512)), partition=128)
        np.testing.assert_array_equal(out, x)

    def test_unit_delay_echo(self, rng):
        x = rng.standard_normal(512)
        c = np.zeros(256)
        c[1] = 1.0
        out, _ = apply_reverb(x, make_ir(c), partition=128)
        expected = x.copy()
        expected[1:] += x[:-1]
        np.testing.assert_allclose(out, expected, atol=1e-12)

    def test_matches_direct_convolution(self, rng):
        for _ in range(20):
            x = rng.standard_normal(512)
            c = np.zeros(256)
            c[1:] = rng.standard_normal(255) * 0.1
            out, _ = apply_reverb(x, make_ir(c), partition=128)
            want = x + np.convolve(x, c)[:512]
            assert np.max(np.abs(out - want)) < 1e-5

    def test_linearity(self, rng):
        x = rng.standard_normal(768)
        ir = make_ir(np.concatenate([[0.0], rng.standard_normal(511) * 0.05]))
        out1, _ = apply_reverb(x, ir, partition=128)
        out2, _ = apply_reverb(3.0 * x, ir, partition=128)
        np.testing.assert_allclose(out2, 3.0 * out1, rtol=1e-12, atol=1e-12)

    def test_streaming_equals_one_shot_any_partitioning(self, rng):
        x = rng.standard_normal(2048)
        ir_values = np.concatenate([[0.0], rng.standard_normal(999) * 0.05])
        conv = ReverbConvolver(make_ir(ir_values), partition=128)
        whole, _ = conv.process(x, conv.initial_state())
        for block in (128, 256, 512, 1024):
            state = conv.initial_state()
            parts = []
            for start in range(0, x.size, block):
                out, state = conv.process(x[start : start + block], state)
                parts.append(out)
            np.testing.assert_array_equal(np.concatenate(parts), whole)

    def test_tail_carries_across_blocks(self, rng):
        # energy injected in block 1 must ring into block 2
        x = np.zeros(512)
        x[10] = 1.0
        c = np.zeros(400)
        c[300] = 0.5
        conv = ReverbConvolver(make_ir(c), partition=128)
        state = conv.initial_state()
        out1, state = conv.process(x[:256], state)
        out2, state = conv.process(x[256:], state)
        assert out2[10 + 300 - 256] == pytest.approx(0.5, abs=1e-12)

    def test_misaligned_block_rejected(self):
        conv = ReverbConvolver(make_ir(np.zeros(256)), partition=128)
        with pytest.raises(ValueError):
            conv.process(np.zeros(100), conv.initial_state())
