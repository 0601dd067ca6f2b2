"""Learnable convolutional reverb with a streaming partitioned convolver.

The impulse response is applied by multiplication in the frequency domain and
the wet signal is summed with the dry input. Streaming uses a uniformly
partitioned overlap-add convolution with a fixed partition size: per-block
cost is bounded by the impulse length, and because the partition size never
depends on the caller's block size, every partition-aligned blocking of the
input produces bit-identical output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_PARTITION = 128


@dataclass(frozen=True)
class ReverbIr:
    """Impulse response whose first sample is fixed at exactly zero."""

    c: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=np.float64)
        if c.ndim != 1 or c.size < 1:
            raise ValueError("impulse response must be a nonempty 1-D array")
        if not np.all(np.isfinite(c)):
            raise ValueError("impulse response must be finite")
        if c[0] != 0.0:
            raise ValueError("impulse response must start with an exact zero")
        object.__setattr__(self, "c", c)

    def __len__(self) -> int:
        return self.c.size


def init_reverb_ir(length: int, seed: int) -> ReverbIr:
    """Fresh impulse response: zero head, Gaussian tail with variance 1e-6."""
    if length < 1:
        raise ValueError("impulse response length must be >= 1")
    rng = np.random.Generator(np.random.Philox(seed))
    c = np.zeros(length)
    if length > 1:
        c[1:] = rng.normal(0.0, 1e-3, length - 1)
    return ReverbIr(c)


@dataclass
class ReverbState:
    """Frequency-domain delay line plus the time-domain overlap tail."""

    spectra: np.ndarray  # (partitions, partition + 1) complex
    tail: np.ndarray  # (partition,)
    head: int = 0

    def copy(self) -> "ReverbState":
        return ReverbState(self.spectra.copy(), self.tail.copy(), self.head)


class ReverbConvolver:
    def __init__(self, ir: ReverbIr, partition: int = DEFAULT_PARTITION):
        if partition < 1:
            raise ValueError("partition size must be positive")
        self.partition = partition
        self.ir_length = len(ir)
        n_parts = -(-self.ir_length // partition)
        padded = np.zeros(n_parts * partition)
        padded[: self.ir_length] = ir.c
        self.ir_spectra = np.fft.rfft(padded.reshape(n_parts, partition), n=2 * partition, axis=1)
        self._gather = np.arange(n_parts)

    @property
    def n_partitions(self) -> int:
        return self.ir_spectra.shape[0]

    def initial_state(self) -> ReverbState:
        return ReverbState(
            spectra=np.zeros((self.n_partitions, self.partition + 1), dtype=np.complex128),
            tail=np.zeros(self.partition),
        )

    def process(self, x: np.ndarray, state: ReverbState) -> tuple[np.ndarray, ReverbState]:
        """Dry plus convolved signal for a block whose length is a multiple of
        the partition size; the convolution tail beyond the block is carried
        in the state."""
        x = np.asarray(x, dtype=np.float64)
        p = self.partition
        if x.size % p != 0:
            raise ValueError(f"block length {x.size} is not a multiple of partition {p}")
        out = np.empty_like(x)
        head, tail = state.head, state.tail
        for start in range(0, x.size, p):
            chunk = x[start : start + p]
            state.spectra[head] = np.fft.rfft(chunk, 2 * p)
            idx = (head - self._gather) % self.n_partitions
            wet_block = np.fft.irfft((self.ir_spectra * state.spectra[idx]).sum(axis=0), 2 * p)
            out[start : start + p] = chunk + wet_block[:p] + tail
            tail = wet_block[p:]
            head = (head + 1) % self.n_partitions
        state.head = head
        state.tail = tail
        return out, state


def apply_reverb(
    x: np.ndarray,
    ir: ReverbIr,
    state: ReverbState | None = None,
    partition: int = DEFAULT_PARTITION,
) -> tuple[np.ndarray, ReverbState]:
    """One-shot functional form of ReverbConvolver.process."""
    conv = ReverbConvolver(ir, partition)
    return conv.process(x, state or conv.initial_state())
