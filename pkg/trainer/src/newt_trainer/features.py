"""Control feature extraction: fundamental frequency and A-weighted loudness.

Features are computed at hop-size frame rate with exactly len(audio) // hop
frames so control tracks align with render output lengths. The pitch backend
is pluggable; the bundled default is a normalized-autocorrelation estimator
good enough for desk-scale material, with synthetic ground truth preferred
when it is available.
"""

from __future__ import annotations

import numpy as np

LOUDNESS_WINDOW = 1024
PITCH_WINDOW = 2048
PITCH_FMIN = 60.0
PITCH_FMAX = 2000.0
_EPS = 1e-10


def symmetric_hann(length: int) -> np.ndarray:
    # mirrored construction, bit-symmetric (same rule as the engine)
    if length == 1:
        return np.ones(1)
    n = np.arange((length + 1) // 2, dtype=np.float64)
    half = 0.5 - 0.5 * np.cos(2.0 * np.pi * n / (length - 1))
    return np.concatenate([half, half[: length // 2][::-1]])


def a_weighting_db(freqs: np.ndarray) -> np.ndarray:
    """Standard A-weighting curve in dB (0 dB at 1 kHz)."""
    f2 = np.asarray(freqs, dtype=np.float64) ** 2
    ra = (12194.0**2 * f2**2) / (
        (f2 + 20.6**2)
        * np.sqrt((f2 + 107.7**2) * (f2 + 737.9**2))
        * (f2 + 12194.0**2)
    )
    with np.errstate(divide="ignore"):
        return 20.0 * np.log10(np.maximum(ra, _EPS)) + 2.0


def _frames(audio: np.ndarray, hop: int, window: int) -> np.ndarray:
    """Center a window on each hop anchor; edge frames reflect-pad."""
    num_frames = audio.size // hop
    half = window // 2
    padded = np.pad(audio, (half, half + window), mode="reflect")
    idx = np.arange(num_frames)[:, None] * hop + np.arange(window)[None, :]
    return padded[idx]


def a_weighted_loudness(
    audio: np.ndarray, sample_rate: int, hop: int = 128, window: int = LOUDNESS_WINDOW
) -> np.ndarray:
    """Perceptually weighted framewise loudness in dB."""
    frames = _frames(np.asarray(audio, dtype=np.float64), hop, window)
    spectra = np.abs(np.fft.rfft(frames * symmetric_hann(window), axis=1)) ** 2
    weights = 10.0 ** (a_weighting_db(np.fft.rfftfreq(window, 1.0 / sample_rate)) / 10.0)
    power = (spectra * weights).sum(axis=1)
    return 10.0 * np.log10(power + _EPS)


def estimate_f0_autocorr(
    audio: np.ndarray,
    sample_rate: int,
    hop: int = 128,
    window: int = PITCH_WINDOW,
    fmin: float = PITCH_FMIN,
    fmax: float = PITCH_FMAX,
) -> tuple[np.ndarray, np.ndarray]:
    """Framewise (f0, confidence) from normalized autocorrelation peaks.

    Confidence is the normalized autocorrelation value at the chosen lag,
    near 1 for strongly periodic frames and near 0 for noise or silence.
    """
    frames = _frames(np.asarray(audio, dtype=np.float64), hop, window)
    frames = frames - frames.mean(axis=1, keepdims=True)
    nfft = 2 * window
    spectra = np.fft.rfft(frames, nfft, axis=1)
    autocorr = np.fft.irfft(spectra * np.conj(spectra), nfft, axis=1)[:, :window]
    energy = autocorr[:, :1]

    lag_lo = max(2, int(sample_rate / fmax))
    lag_hi = min(window - 2, int(np.ceil(sample_rate / fmin)))
    search = autocorr[:, lag_lo : lag_hi + 1]
    peak = search.argmax(axis=1) + lag_lo

    # parabolic refinement around the integer peak
    rows = np.arange(frames.shape[0])
    left = autocorr[rows, peak - 1]
    mid = autocorr[rows, peak]
    right = autocorr[rows, peak + 1]
    denom = left - 2 * mid + right
    shift = np.where(np.abs(denom) > _EPS, 0.5 * (left - right) / denom, 0.0)
    lag = peak + np.clip(shift, -0.5, 0.5)

    f0 = sample_rate / lag
    confidence = np.clip(mid / np.maximum(energy[:, 0], _EPS), 0.0, 1.0)
    silent = energy[:, 0] < _EPS
    confidence[silent] = 0.0
    f0[silent] = fmin
    return f0, confidence


def harmonic_tone(
    duration: float,
    sample_rate: int,
    f0: float | np.ndarray,
    amplitude: float | np.ndarray = 0.5,
    rolloff: float = 1.0,
    seed: int | None = None,
) -> np.ndarray:
    """Bandlimited sawtooth-like additive tone with known fundamental.

    Harmonic k gets amplitude 1 / k**rolloff, truncated below Nyquist. Used
    as synthetic ground-truth material for preprocessing and training tests.
    """
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    f0 = np.broadcast_to(np.asarray(f0, dtype=np.float64), (n,))
    phase = 2.0 * np.pi * np.cumsum(f0) / sample_rate
    max_k = max(1, int(sample_rate / 2 / f0.max()) - 1)
    rng = np.random.default_rng(seed)
    out = np.zeros(n)
    for k in range(1, max_k + 1):
        phi0 = rng.uniform(0, 2 * np.pi) if seed is not None else 0.0
        out += np.sin(k * phase + phi0) / k**rolloff
    out /= np.max(np.abs(out))
    return out * np.broadcast_to(np.asarray(amplitude, dtype=np.float64), (n,)) * np.ones_like(t)
