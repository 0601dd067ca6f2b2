"""Model shape and training hyperparameters.

ModelShape mirrors the engine's config block in docs/format.md field for
field; the JSON written at export must carry exactly these keys.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class ModelShape:
    sample_rate: int = 16000
    hop_size: int = 128
    n_harmonics: int = 101
    n_newt_channels: int = 64
    shaper_depth: int = 4
    shaper_hidden: int = 8
    control_dim: int = 128
    mlp_depth: int = 4
    mlp_hidden: int = 128
    noise_fir_taps: int = 256
    reverb_length: int | None = None

    def __post_init__(self):
        if self.reverb_length is None:
            object.__setattr__(self, "reverb_length", 2 * self.sample_rate)

    @property
    def noise_bins(self) -> int:
        return self.noise_fir_taps // 2 + 1


# reduced shape for fast desk-scale runs (training mechanics, not fidelity)
DESK_SHAPE = ModelShape(
    n_harmonics=24,
    n_newt_channels=4,
    control_dim=64,
    mlp_hidden=64,
    reverb_length=2048,
)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    lr_decay: float = 0.9
    lr_decay_steps: int = 10_000
    grad_clip_norm: float = 2.0
    batch_size: int = 8
    iterations: int = 5_000
    seed: int = 0

    def __post_init__(self):
        if min(self.learning_rate, self.lr_decay, self.grad_clip_norm) <= 0:
            raise ValueError("training hyperparameters must be positive")
        if min(self.lr_decay_steps, self.batch_size, self.iterations) < 1:
            raise ValueError("training hyperparameters must be positive")


@dataclass(frozen=True)
class DatasetSpec:
    sample_rate: int = 16000
    hop_size: int = 128
    segment_seconds: float = 4.0
    confidence_threshold: float = 0.85
    split_ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)

    @property
    def segment_frames(self) -> int:
        return int(self.segment_seconds * self.sample_rate) // self.hop_size
