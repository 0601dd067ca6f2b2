"""Core signal types and DSP primitives.

Everything in this module is pure and stateless: windowing, magnitude STFT,
FFT convolution, and the linear frame-to-sample upsampler used for control
signals. All functions operate on float64 numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import next_fast_len


@dataclass(frozen=True)
class AudioBuffer:
    """Mono sample sequence at a fixed sample rate.

    Samples are dimensionless amplitudes, nominally in [-1, 1], and must be
    finite.
    """

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError("AudioBuffer requires a 1-D sample array")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if samples.size and not np.all(np.isfinite(samples)):
            raise ValueError("AudioBuffer samples must be finite")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class FrameSeries:
    """Framewise values at hop-size frame rate: shape (num_frames, channels)."""

    values: np.ndarray
    hop_size: int
    sample_rate: int

    def __post_init__(self):
        values = np.atleast_2d(np.asarray(self.values, dtype=np.float64))
        if values.ndim != 2:
            raise ValueError("FrameSeries values must be 2-D (frames x channels)")
        if self.hop_size <= 0 or self.sample_rate <= 0:
            raise ValueError("hop_size and sample_rate must be positive")
        object.__setattr__(self, "values", values)

    @property
    def num_frames(self) -> int:
        return self.values.shape[0]

    @property
    def num_channels(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class Spectrogram:
    """Nonnegative magnitude spectra, shape (num_frames, window_length // 2 + 1)."""

    magnitudes: np.ndarray
    window_length: int

    def __post_init__(self):
        mags = np.asarray(self.magnitudes, dtype=np.float64)
        if mags.ndim != 2 or mags.shape[1] != self.window_length // 2 + 1:
            raise ValueError("magnitude matrix must have window_length // 2 + 1 bins")
        object.__setattr__(self, "magnitudes", mags)

    @property
    def num_frames(self) -> int:
        return self.magnitudes.shape[0]

    @property
    def num_bins(self) -> int:
        return self.magnitudes.shape[1]


def hann_window(length: int) -> np.ndarray:
    """Symmetric Hann window of the given length, values in [0, 1].

    The symmetric form satisfies w[n] == w[length - 1 - n]; a length-1 window
    degenerates to [1.0].
    """
    if length < 1:
        raise ValueError("window length must be >= 1")
    if length == 1:
        return np.ones(1)
    # compute one half and mirror so w[n] == w[length - 1 - n] holds bit-exactly
    n = np.arange((length + 1) // 2, dtype=np.float64)
    half = 0.5 - 0.5 * np.cos(2.0 * np.pi * n / (length - 1))
    return np.concatenate([half, half[: length // 2][::-1]])


def stft_magnitude(x: AudioBuffer | np.ndarray, window_length: int, hop: int) -> Spectrogram:
    """Hann-windowed magnitude STFT with no padding or centering.

    Frames start at sample 0 and advance by `hop`; the frame count is
    floor((len(x) - window_length) / hop) + 1. Audio shorter than one window
    is an error.
    """
    samples = x.samples if isinstance(x, AudioBuffer) else np.asarray(x, dtype=np.float64)
    if window_length < 1 or hop < 1:
        raise ValueError("window_length and hop must be positive")
    if hop > window_length:
        raise ValueError("hop must not exceed window_length")
    if samples.size < window_length:
        raise ValueError(
            f"audio of length {samples.size} is shorter than one analysis window ({window_length})"
        )
    frames = np.lib.stride_tricks.sliding_window_view(samples, window_length)[::hop]
    mags = np.abs(np.fft.rfft(frames * hann_window(window_length), axis=1))
    return Spectrogram(magnitudes=mags, window_length=window_length)


def fft_convolve(x: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Full linear convolution computed by multiplication in the frequency domain.

    Output length is len(x) + len(h) - 1, matching direct time-domain
    convolution to numerical precision.
    """
    x = np.asarray(x, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    if x.size == 0 or h.size == 0:
        raise ValueError("fft_convolve requires nonempty inputs")
    n = x.size + h.size - 1
    nfft = next_fast_len(n)
    y = np.fft.irfft(np.fft.rfft(x, nfft) * np.fft.rfft(h, nfft), nfft)
    return y[:n]


def ramp_segments(starts: np.ndarray, ends: np.ndarray, hop: int) -> np.ndarray:
    """Per-segment linear ramps: segment j covers hop samples from starts[j]
    toward ends[j] (exclusive of the endpoint).

    starts/ends have shape (segments, channels); the result has shape
    (channels, segments * hop). Sample t of segment j is
    starts[j] + (ends[j] - starts[j]) * t / hop, an expression that depends
    only on that segment's endpoints, so any segment-aligned split of a longer
    sequence reproduces identical samples.
    """
    starts = np.atleast_2d(np.asarray(starts, dtype=np.float64))
    ends = np.atleast_2d(np.asarray(ends, dtype=np.float64))
    if starts.shape != ends.shape:
        raise ValueError("starts and ends must have matching shapes")
    if hop < 1:
        raise ValueError("hop must be positive")
    ramp = np.arange(hop, dtype=np.float64) / hop
    # (segments, hop, channels)
    out = starts[:, None, :] + (ends - starts)[:, None, :] * ramp[None, :, None]
    segments, _, channels = out.shape
    return np.moveaxis(out, 2, 0).reshape(channels, segments * hop)


def upsample_linear(frames: FrameSeries) -> np.ndarray:
    """Upsample framewise values to sample rate by linear interpolation.

    Sample k * hop_size carries frames[k] exactly; samples between successive
    frame anchors are linearly interpolated, and samples after the last anchor
    hold the final frame value. The result has shape
    (channels, num_frames * hop_size).
    """
    if frames.num_frames < 1:
        raise ValueError("upsample_linear requires at least one frame")
    v = frames.values
    ends = np.concatenate([v[1:], v[-1:]], axis=0)
    return ramp_segments(v, ends, frames.hop_size)
