"""Antialiased harmonic exciter.

A bank of harmonic cosines is driven by per-sample fundamental frequency and
mixed down to one weighted mixture per waveshaper channel. Harmonics at or
above Nyquist are masked to zero rather than skipped, keeping tensor shapes
static for streaming.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SchemaError

TWO_PI = 2.0 * np.pi


@dataclass
class OscillatorState:
    """Accumulated instantaneous phase of the fundamental, wrapped into
    [0, 2*pi) at every internal chunk boundary to bound its magnitude."""

    phase: float = 0.0

    def copy(self) -> "OscillatorState":
        return OscillatorState(self.phase)


def antialias_mask(f0, k: int, sample_rate: int) -> np.ndarray:
    """1 where harmonic k of f0 stays strictly below Nyquist, else 0."""
    if k < 1:
        raise ValueError("harmonic index must be >= 1")
    f0 = np.asarray(f0, dtype=np.float64)
    return (k * f0 < sample_rate / 2).astype(np.float64)


class HarmonicExciter:
    def __init__(
        self, mixer_weight: np.ndarray, mixer_bias: np.ndarray, sample_rate: int, chunk_size: int = 128
    ):
        self.weight = np.asarray(mixer_weight, dtype=np.float64)
        self.bias = np.asarray(mixer_bias, dtype=np.float64)
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[0],):
            raise SchemaError("mixer weight must be (channels, harmonics) with matching bias")
        self.sample_rate = sample_rate
        self.chunk_size = chunk_size
        self.harmonics = np.arange(1, self.weight.shape[1] + 1, dtype=np.float64)[:, None]

    @property
    def n_channels(self) -> int:
        return self.weight.shape[0]

    @property
    def n_harmonics(self) -> int:
        return self.weight.shape[1]

    def initial_state(self) -> OscillatorState:
        return OscillatorState()

    def render(self, f0: np.ndarray, state: OscillatorState) -> tuple[np.ndarray, OscillatorState]:
        """Render the exciter block for per-sample f0 (Hz).

        Returns ((channels, len(f0)), new state). Internally the block is
        processed in fixed chunks with the phase wrapped at each boundary, so
        any chunk-aligned split of a longer stream is sample-identical to a
        single pass.
        """
        f0 = np.asarray(f0, dtype=np.float64)
        if f0.size == 0:
            return np.zeros((self.n_channels, 0)), state
        if not np.all(np.isfinite(f0)) or np.any(f0 <= 0):
            raise ValueError("f0 must be positive and finite at every sample")
        out = np.empty((self.n_channels, f0.size))
        phase = state.phase
        for start in range(0, f0.size, self.chunk_size):
            sl = slice(start, min(start + self.chunk_size, f0.size))
            chunk = f0[sl]
            phi = phase + np.cumsum(TWO_PI * chunk / self.sample_rate)
            phase = float(np.mod(phi[-1], TWO_PI))
            bank = np.cos(self.harmonics * phi[None, :])
            bank *= self.harmonics * chunk[None, :] < self.sample_rate / 2
            out[:, sl] = self.weight @ bank + self.bias[:, None]
        return out, OscillatorState(phase)


def render_exciter(
    f0: np.ndarray,
    mixer_weight: np.ndarray,
    mixer_bias: np.ndarray,
    sample_rate: int,
    state: OscillatorState | None = None,
) -> tuple[np.ndarray, OscillatorState]:
    """One-shot functional form of HarmonicExciter.render."""
    exciter = HarmonicExciter(mixer_weight, mixer_bias, sample_rate)
    return exciter.render(f0, state or exciter.initial_state())
