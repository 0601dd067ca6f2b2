"""Verification metrics: multi-resolution spectral loss and analysis helpers.

The loss compares Hann-windowed magnitude STFTs at several window lengths,
combining a Frobenius-norm convergence term with an L1 log-magnitude term.
Everything here is pure and deterministic; the epsilon floor keeps the log
term total when spectra contain exact zeros.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dsp import AudioBuffer, stft_magnitude

LOG_EPSILON = 1e-7


@dataclass(frozen=True)
class MrStftConfig:
    window_lengths: tuple[int, ...] = (512, 1024, 2048)
    hop_divisor: int = 4
    epsilon: float = LOG_EPSILON

    def __post_init__(self):
        if tuple(sorted(self.window_lengths)) != tuple(self.window_lengths):
            raise ValueError("window lengths must be sorted")
        for m in self.window_lengths:
            if m & (m - 1):
                raise ValueError("window lengths must be powers of two")

    def hop(self, window_length: int) -> int:
        return window_length // self.hop_divisor


def _samples(x) -> np.ndarray:
    return x.samples if isinstance(x, AudioBuffer) else np.asarray(x, dtype=np.float64)


def spectral_convergence(x, x_hat, window_length: int, hop: int | None = None) -> float:
    """Frobenius distance of magnitude spectra, normalized by the reference norm."""
    x, x_hat = _samples(x), _samples(x_hat)
    if x.size != x_hat.size:
        raise ValueError("signals must have equal length")
    hop = hop or window_length // 4
    ref = stft_magnitude(x, window_length, hop).magnitudes
    est = stft_magnitude(x_hat, window_length, hop).magnitudes
    denom = np.linalg.norm(ref)
    if denom == 0:
        raise ValueError("spectral convergence is undefined for a silent reference")
    return float(np.linalg.norm(ref - est) / denom)


def log_magnitude_distance(
    x, x_hat, window_length: int, hop: int | None = None, epsilon: float = LOG_EPSILON
) -> float:
    """L1 distance between floored log magnitudes, scaled by 1 / window_length."""
    x, x_hat = _samples(x), _samples(x_hat)
    if x.size != x_hat.size:
        raise ValueError("signals must have equal length")
    hop = hop or window_length // 4
    ref = stft_magnitude(x, window_length, hop).magnitudes
    est = stft_magnitude(x_hat, window_length, hop).magnitudes
    diff = np.log(np.maximum(ref, epsilon)) - np.log(np.maximum(est, epsilon))
    return float(np.abs(diff).sum() / window_length)


def mr_stft_report(x, x_hat, config: MrStftConfig = MrStftConfig()) -> dict:
    """Per-scale terms plus the aggregate (mean over scales of sc + log)."""
    scales = []
    for m in config.window_lengths:
        hop = config.hop(m)
        scales.append(
            {
                "window_length": m,
                "spectral_convergence": spectral_convergence(x, x_hat, m, hop),
                "log_magnitude": log_magnitude_distance(x, x_hat, m, hop, config.epsilon),
            }
        )
    loss = float(
        np.mean([s["spectral_convergence"] + s["log_magnitude"] for s in scales])
    )
    return {"scales": scales, "loss": loss}


def mr_stft_loss(x, x_hat, config: MrStftConfig = MrStftConfig()) -> float:
    return mr_stft_report(x, x_hat, config)["loss"]


def harmonic_peak_set(
    x,
    f0: float,
    sample_rate: int,
    max_k: int,
    window_length: int = 2048,
    threshold_db: float = -40.0,
) -> set[int]:
    """Harmonic indices whose spectral magnitude reaches within threshold_db
    of the strongest peak, for a constant-f0 signal."""
    samples = _samples(x)
    spec = stft_magnitude(samples, window_length, window_length // 4)
    profile = spec.magnitudes.mean(axis=0)
    floor = profile.max() * 10.0 ** (threshold_db / 20.0)
    detected = set()
    for k in range(1, max_k + 1):
        bin_center = int(round(k * f0 * window_length / sample_rate))
        if bin_center > window_length // 2:
            break
        lo = max(bin_center - 1, 0)
        hi = min(bin_center + 2, profile.size)
        if profile[lo:hi].max() >= floor:
            detected.add(k)
    return detected
