import numpy as np
import pytest
import torch

from newt_trainer.loss import MrStftLoss


@pytest.fixture(scope="module")
def signal():
    rng = np.random.default_rng(99)
    n = np.arange(32000)
    x = 0.5 * np.cos(2 * np.pi * 440.0 * n / 16000) + 0.05 * rng.standard_normal(n.size)
    return torch.from_numpy(x).float()


class TestMrStftLoss:
    def test_identical_signals_zero(self, signal):
        loss = MrStftLoss()(signal[None], signal[None])
        assert float(loss) == 0.0

    def test_positive_for_mismatch(self, signal):
        other = signal * 0.5
        assert float(MrStftLoss()(signal[None], other[None])) > 0.0

    def test_spectral_convergence_identity(self, signal):
        # with the log term removed by construction: sc(x, 0.5x) = 0.5
        loss_fn = MrStftLoss(window_lengths=(1024,))
        ref = loss_fn._magnitudes(signal[None], 1024)
        est = loss_fn._magnitudes(0.5 * signal[None], 1024)
        sc = torch.linalg.norm(ref - est) / torch.linalg.norm(ref)
        assert float(sc) == pytest.approx(0.5, abs=1e-5)

    def test_framing_matches_no_padding_convention(self, signal):
        loss_fn = MrStftLoss(window_lengths=(512,))
        mags = loss_fn._magnitudes(signal[None], 512)
        expected_frames = (signal.shape[0] - 512) // 128 + 1
        assert mags.shape == (1, 257, expected_frames)
