"""Mono WAV reading and writing.

The default output is 16-bit PCM with saturating quantization; float32 output
preserves samples losslessly for fixtures and comparisons.
"""

from __future__ import annotations

import numpy as np
from scipy.io import wavfile

from .dsp import AudioBuffer


def write_wav(path, audio: AudioBuffer, float32: bool = False) -> None:
    if float32:
        wavfile.write(path, audio.sample_rate, audio.samples.astype("<f4"))
    else:
        q = np.clip(np.rint(audio.samples * 32767.0), -32768, 32767).astype("<i2")
        wavfile.write(path, audio.sample_rate, q)


def read_wav(path) -> AudioBuffer:
    sample_rate, data = wavfile.read(path)
    if data.ndim > 1:
        data = data[:, 0]
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32767.0
    elif data.dtype == np.int32:
        samples = data.astype(np.float64) / 2147483647.0
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
    else:
        raise ValueError(f"unsupported WAV sample format {data.dtype}")
    return AudioBuffer(samples=samples, sample_rate=int(sample_rate))
