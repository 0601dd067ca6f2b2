"""Dataset preprocessing: audio to aligned control tracks plus statistics.

Pipeline per source signal: mono (left channel), per-subset amplitude
normalization, resample to the target rate, framewise f0/confidence and
A-weighted loudness, segmentation into fixed-length windows, and filtering
by mean pitch confidence. Control statistics for standardization are
computed across the kept training segments.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

from .config import DatasetSpec
from .features import a_weighted_loudness, estimate_f0_autocorr

PitchBackend = Callable[[np.ndarray, int, int], tuple[np.ndarray, np.ndarray]]


@dataclass
class Segment:
    audio: np.ndarray  # segment_frames * hop samples
    f0: np.ndarray  # per frame, Hz
    loudness: np.ndarray  # per frame, dB
    confidence: np.ndarray  # per frame, [0, 1]

    @property
    def num_frames(self) -> int:
        return self.f0.size


@dataclass
class PreparedDataset:
    spec: DatasetSpec
    train: list[Segment]
    validation: list[Segment]
    test: list[Segment]
    stats_mean: np.ndarray  # (f0, loudness)
    stats_std: np.ndarray

    @property
    def all_segments(self) -> list[Segment]:
        return self.train + self.validation + self.test


def load_audio(path, target_rate: int) -> np.ndarray:
    rate, data = wavfile.read(path)
    if data.ndim > 1:
        data = data[:, 0]  # keep the left channel
    if data.dtype == np.int16:
        audio = data.astype(np.float64) / 32767.0
    elif data.dtype == np.int32:
        audio = data.astype(np.float64) / 2147483647.0
    else:
        audio = data.astype(np.float64)
    if rate != target_rate:
        from math import gcd

        g = gcd(int(rate), int(target_rate))
        audio = resample_poly(audio, target_rate // g, rate // g)
    return audio


def default_pitch_backend(audio: np.ndarray, sample_rate: int, hop: int):
    return estimate_f0_autocorr(audio, sample_rate, hop)


def preprocess(
    signals: Sequence[np.ndarray | tuple[np.ndarray, np.ndarray]],
    spec: DatasetSpec = DatasetSpec(),
    pitch_backend: PitchBackend | None = None,
) -> PreparedDataset:
    """Build aligned control tracks and split into train/validation/test.

    Each entry is either raw audio (pitch comes from the backend) or an
    (audio, f0_ground_truth) pair with per-frame f0 and implicit full
    confidence. Amplitude is normalized to unit peak across the whole subset
    before feature extraction.
    """
    backend = pitch_backend or default_pitch_backend
    hop = spec.hop_size

    audios, truths = [], []
    for entry in signals:
        if isinstance(entry, tuple):
            audio, truth = entry
            truths.append(np.asarray(truth, dtype=np.float64))
        else:
            audio, truth = entry, None
            truths.append(None)
        audios.append(np.asarray(audio, dtype=np.float64))

    peak = max((np.max(np.abs(a)) for a in audios if a.size), default=1.0)
    if peak > 0:
        audios = [a / peak for a in audios]

    segments: list[Segment] = []
    seg_frames = spec.segment_frames
    for audio, truth in zip(audios, truths):
        num_frames = audio.size // hop
        if num_frames < seg_frames:
            continue
        audio = audio[: num_frames * hop]
        loudness = a_weighted_loudness(audio, spec.sample_rate, hop)
        if truth is not None:
            if truth.size != num_frames:
                raise ValueError("ground-truth f0 must have one value per frame")
            f0, confidence = truth, np.ones(num_frames)
        else:
            f0, confidence = backend(audio, spec.sample_rate, hop)
        for start in range(0, num_frames - seg_frames + 1, seg_frames):
            stop = start + seg_frames
            seg = Segment(
                audio=audio[start * hop : stop * hop],
                f0=f0[start:stop],
                loudness=loudness[start:stop],
                confidence=confidence[start:stop],
            )
            if seg.confidence.mean() >= spec.confidence_threshold:
                segments.append(seg)

    if not segments:
        raise ValueError("no segments survived confidence filtering")

    n = len(segments)
    n_train = max(1, int(round(spec.split_ratios[0] * n)))
    n_val = int(round(spec.split_ratios[1] * n))
    train = segments[:n_train]
    validation = segments[n_train : n_train + n_val]
    test = segments[n_train + n_val :]

    f0_all = np.concatenate([s.f0 for s in train])
    loud_all = np.concatenate([s.loudness for s in train])
    mean = np.array([f0_all.mean(), loud_all.mean()])
    std = np.array([max(f0_all.std(), 1e-3), max(loud_all.std(), 1e-3)])
    return PreparedDataset(
        spec=spec, train=train, validation=validation, test=test, stats_mean=mean, stats_std=std
    )


def write_control_csv(path, segment: Segment) -> None:
    """Engine-schema control CSV: frame,f0_hz,loudness_db,confidence."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame", "f0_hz", "loudness_db", "confidence"])
        for k in range(segment.num_frames):
            writer.writerow(
                [
                    k,
                    repr(float(segment.f0[k])),
                    repr(float(segment.loudness[k])),
                    repr(float(segment.confidence[k])),
                ]
            )


def write_loss_curve(path, history: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "loss", "grad_norm_preclip", "grad_norm_postclip", "lr"])
        for row in history:
            writer.writerow(
                [row["step"], row["loss"], row["grad_norm_preclip"], row["grad_norm_postclip"], row["lr"]]
            )
