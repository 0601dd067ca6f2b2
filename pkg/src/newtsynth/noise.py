"""Filtered-noise residual path.

An MLP maps the control embedding to per-frame FIR magnitude responses; each
response becomes a causal linear-phase impulse response by inverse real DFT,
rotation to causal form, and Hann windowing. White noise drawn from a
counter-based generator is convolved with each frame's filter and
overlap-added, so blockwise rendering with carried state is bit-identical to
a single pass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .dsp import fft_convolve, hann_window
from .mlp import ControlMlp

MAGNITUDE_EXPONENT = np.log(10.0)


def magnitude_map(x: np.ndarray) -> np.ndarray:
    """Squash filter logits into bounded positive magnitudes: 2 * sigmoid(x) ** ln(10)."""
    return 2.0 * expit(np.asarray(x, dtype=np.float64)) ** MAGNITUDE_EXPONENT


class NoiseFilterMlp:
    """Control MLP whose output layer is squashed into FIR magnitudes."""

    def __init__(self, mlp: ControlMlp):
        if mlp.output_map is None:
            mlp = ControlMlp(mlp.hidden, mlp.out_weight, mlp.out_bias, output_map=magnitude_map)
        self.mlp = mlp

    @property
    def n_bins(self) -> int:
        return self.mlp.output_dim

    def forward(self, z: np.ndarray) -> np.ndarray:
        """Per-frame magnitude responses, shape (num_frames, taps // 2 + 1)."""
        return self.mlp.forward(z)


def design_fir(magnitude: np.ndarray) -> np.ndarray:
    """Turn a one-sided magnitude response into a causal windowed FIR.

    The zero-phase impulse response (inverse real DFT of the magnitudes) is
    circularly rotated by taps / 2 into causal linear-phase form, then
    multiplied by a symmetric Hann window of length taps, where
    taps = 2 * (len(magnitude) - 1).
    """
    magnitude = np.asarray(magnitude, dtype=np.float64)
    taps = 2 * (magnitude.size - 1)
    if taps < 2:
        raise ValueError("magnitude response must cover at least two bins")
    zero_phase = np.fft.irfft(magnitude, n=taps)
    causal = np.roll(zero_phase, taps // 2)
    return causal * hann_window(taps)


@dataclass
class NoiseState:
    """Streaming state: pending overlap-add tail plus the noise generator."""

    tail: np.ndarray
    rng: np.random.Generator
    seed: int

    @classmethod
    def initial(cls, taps: int, seed: int) -> "NoiseState":
        return cls(
            tail=np.zeros(taps - 1),
            rng=np.random.Generator(np.random.Philox(seed)),
            seed=seed,
        )


class NoiseRenderer:
    def __init__(self, hop_size: int, taps: int):
        self.hop_size = hop_size
        self.taps = taps

    def initial_state(self, seed: int) -> NoiseState:
        return NoiseState.initial(self.taps, seed)

    def render(self, bank: np.ndarray, state: NoiseState) -> tuple[np.ndarray, NoiseState]:
        """Filter fresh white noise with one FIR per frame.

        bank is (num_frames, taps // 2 + 1); output length is
        num_frames * hop_size. Noise is drawn one hop per frame, in frame
        order, which fixes the generator stream independently of blocking.
        """
        bank = np.atleast_2d(np.asarray(bank, dtype=np.float64))
        if bank.size == 0:
            raise ValueError("filter bank must contain at least one frame")
        if bank.shape[1] != self.taps // 2 + 1:
            raise ValueError(f"expected {self.taps // 2 + 1} magnitude bins, got {bank.shape[1]}")
        hop = self.hop_size
        out = np.empty(bank.shape[0] * hop)
        tail = state.tail
        for j in range(bank.shape[0]):
            noise = state.rng.uniform(-1.0, 1.0, hop)
            ir = design_fir(bank[j])
            y = fft_convolve(noise, ir)  # hop + taps - 1 samples
            y[: self.taps - 1] += tail
            out[j * hop : (j + 1) * hop] = y[:hop]
            tail = y[hop:]
        return out, NoiseState(tail=tail, rng=state.rng, seed=state.seed)


def render_noise(
    bank: np.ndarray, hop_size: int, state: NoiseState
) -> tuple[np.ndarray, NoiseState]:
    """One-shot functional form of NoiseRenderer.render."""
    taps = 2 * (np.atleast_2d(bank).shape[1] - 1)
    return NoiseRenderer(hop_size, taps).render(bank, state)
