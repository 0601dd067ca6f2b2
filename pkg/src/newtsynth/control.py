"""Control signals and the causal control encoder.

A ControlTrack carries framewise fundamental frequency and loudness (plus an
optional confidence channel) at hop-size frame rate. The encoder standardizes
the two control channels, runs them through a single-layer causal GRU, and
projects each hidden state with a time-distributed dense layer to produce the
control embedding.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .dsp import FrameSeries
from .errors import ControlCsvError, SchemaError
from .weights import NormalizationStats

CSV_HEADER = ["frame", "f0_hz", "loudness_db"]


@dataclass(frozen=True)
class ControlTrack:
    f0: np.ndarray
    loudness: np.ndarray
    hop_size: int
    confidence: np.ndarray | None = None

    def __post_init__(self):
        f0 = np.asarray(self.f0, dtype=np.float64)
        loudness = np.asarray(self.loudness, dtype=np.float64)
        if f0.shape != loudness.shape or f0.ndim != 1:
            raise ValueError("f0 and loudness must be 1-D sequences of equal length")
        if not (np.all(np.isfinite(f0)) and np.all(np.isfinite(loudness))):
            raise ValueError("control signals must be finite")
        if self.hop_size < 1:
            raise ValueError("hop_size must be positive")
        object.__setattr__(self, "f0", f0)
        object.__setattr__(self, "loudness", loudness)
        if self.confidence is not None:
            conf = np.asarray(self.confidence, dtype=np.float64)
            if conf.shape != f0.shape:
                raise ValueError("confidence must match f0 length")
            object.__setattr__(self, "confidence", conf)

    @property
    def num_frames(self) -> int:
        return self.f0.size

    def slice(self, start: int, stop: int) -> "ControlTrack":
        conf = None if self.confidence is None else self.confidence[start:stop]
        return ControlTrack(
            f0=self.f0[start:stop],
            loudness=self.loudness[start:stop],
            hop_size=self.hop_size,
            confidence=conf,
        )


def read_control_csv(path, hop_size: int = 128) -> ControlTrack:
    """Parse a control CSV with header frame,f0_hz,loudness_db[,confidence].

    Parsing is strict: the header must match, every row needs a finite f0 and
    loudness, and errors carry the offending 1-based row number.
    """
    f0, loudness, confidence = [], [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ControlCsvError("empty control file", row=1)
        header = [h.strip() for h in header]
        has_conf = header == CSV_HEADER + ["confidence"]
        if not has_conf and header != CSV_HEADER:
            raise ControlCsvError(f"bad header {header!r}", row=1)
        for row_num, row in enumerate(reader, start=2):
            if not row:
                continue
            expected = 4 if has_conf else 3
            if len(row) != expected:
                raise ControlCsvError(f"expected {expected} columns, got {len(row)}", row=row_num)
            try:
                values = [float(v) for v in row]
            except ValueError:
                raise ControlCsvError(f"non-numeric value in {row!r}", row=row_num)
            if not all(np.isfinite(values)):
                raise ControlCsvError("non-finite control value", row=row_num)
            if int(values[0]) != len(f0):
                raise ControlCsvError(
                    f"frame index {values[0]:g} out of order (expected {len(f0)})", row=row_num
                )
            f0.append(values[1])
            loudness.append(values[2])
            if has_conf:
                confidence.append(values[3])
    if not f0:
        raise ControlCsvError("control file contains no frames", row=2)
    return ControlTrack(
        f0=np.array(f0),
        loudness=np.array(loudness),
        hop_size=hop_size,
        confidence=np.array(confidence) if confidence else None,
    )


def write_control_csv(path, track: ControlTrack) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if track.confidence is not None:
            writer.writerow(CSV_HEADER + ["confidence"])
            for k in range(track.num_frames):
                writer.writerow([k, track.f0[k], track.loudness[k], track.confidence[k]])
        else:
            writer.writerow(CSV_HEADER)
            for k in range(track.num_frames):
                writer.writerow([k, track.f0[k], track.loudness[k]])


def standardize(track: ControlTrack, stats: NormalizationStats, sample_rate: int) -> FrameSeries:
    """Zero-mean/unit-variance control channels: (x - mean) / std per channel."""
    values = np.stack(
        [
            (track.f0 - stats.mean[0]) / stats.std[0],
            (track.loudness - stats.mean[1]) / stats.std[1],
        ],
        axis=1,
    )
    return FrameSeries(values=values, hop_size=track.hop_size, sample_rate=sample_rate)


def synthetic_track(
    num_frames: int,
    hop_size: int = 128,
    sample_rate: int = 16000,
    f0_lo: float = 196.0,
    f0_hi: float = 392.0,
    loudness_db: float = -25.0,
) -> ControlTrack:
    """Deterministic glide-plus-vibrato control track for benchmarks and smoke tests."""
    t = np.arange(num_frames) * hop_size / sample_rate
    glide = np.linspace(0.0, 1.0, num_frames) if num_frames > 1 else np.zeros(1)
    f0 = f0_lo * (f0_hi / f0_lo) ** glide
    f0 = f0 * (1.0 + 0.005 * np.sin(2.0 * np.pi * 5.0 * t))
    loudness = loudness_db + 4.0 * np.sin(2.0 * np.pi * 0.8 * t)
    return ControlTrack(f0=f0, loudness=loudness, hop_size=hop_size)


class GruState:
    """Hidden vector of the causal control GRU; zero at stream start."""

    def __init__(self, h: np.ndarray):
        self.h = np.asarray(h, dtype=np.float64)

    @classmethod
    def initial(cls, hidden_size: int) -> "GruState":
        return cls(np.zeros(hidden_size))

    def copy(self) -> "GruState":
        return GruState(self.h.copy())


class ControlEncoder:
    """Causal GRU followed by a time-distributed dense projection.

    Gate blocks are packed in order (reset, update, candidate) in both weight
    matrices, with separate input and hidden bias vectors; the candidate's
    reset gate multiplies only the hidden contribution:

        r  = sigmoid(Wr x + br_i + Ur h + br_h)
        u  = sigmoid(Wu x + bu_i + Uu h + bu_h)
        n  = tanh(Wn x + bn_i + r * (Un h + bn_h))
        h' = (1 - u) * n + u * h
    """

    def __init__(self, w_ih, w_hh, b_ih, b_hh, dense_weight, dense_bias):
        self.w_ih = np.asarray(w_ih, dtype=np.float64)
        self.w_hh = np.asarray(w_hh, dtype=np.float64)
        self.b_ih = np.asarray(b_ih, dtype=np.float64)
        self.b_hh = np.asarray(b_hh, dtype=np.float64)
        self.dense_weight = np.asarray(dense_weight, dtype=np.float64)
        self.dense_bias = np.asarray(dense_bias, dtype=np.float64)
        if self.w_ih.shape[0] % 3 != 0 or self.w_hh.shape != (
            self.w_ih.shape[0],
            self.w_ih.shape[0] // 3,
        ):
            raise SchemaError("GRU weight matrices have inconsistent gate packing")

    @property
    def hidden_size(self) -> int:
        return self.w_hh.shape[1]

    @property
    def input_size(self) -> int:
        return self.w_ih.shape[1]

    def initial_state(self) -> GruState:
        return GruState.initial(self.hidden_size)

    def step(self, x: np.ndarray, state: GruState) -> GruState:
        """Advance the GRU by one frame; strictly causal."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.input_size,):
            raise SchemaError(f"GRU input must have shape ({self.input_size},)")
        d = self.hidden_size
        gi = self.w_ih @ x + self.b_ih
        gh = self.w_hh @ state.h + self.b_hh
        r = expit(gi[:d] + gh[:d])
        u = expit(gi[d : 2 * d] + gh[d : 2 * d])
        n = np.tanh(gi[2 * d :] + r * gh[2 * d :])
        return GruState((1.0 - u) * n + u * state.h)

    def encode(self, frames: FrameSeries, state: GruState) -> tuple[np.ndarray, GruState]:
        """Embed a frame block; returns (z of shape (num_frames, hidden), new state).

        Carrying the returned state into the next call makes any blockwise
        split of the input bit-identical to a single pass.
        """
        if frames.num_channels != self.input_size:
            raise SchemaError(
                f"encoder expects {self.input_size} control channels, got {frames.num_channels}"
            )
        z = np.empty((frames.num_frames, self.hidden_size))
        for k in range(frames.num_frames):
            state = self.step(frames.values[k], state)
            z[k] = self.dense_weight @ state.h + self.dense_bias
        return z, state


def gru_step(x: np.ndarray, state: GruState, encoder: ControlEncoder) -> GruState:
    """Single GRU update, exposed for tests and fixture generation."""
    return encoder.step(x, state)
