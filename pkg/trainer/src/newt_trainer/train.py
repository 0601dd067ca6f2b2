"""Training loop: Adam with stepwise exponential learning-rate decay and
global gradient-norm clipping, minimizing the multi-resolution spectral loss.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from .config import ModelShape, TrainConfig
from .data import PreparedDataset, Segment
from .loss import MrStftLoss
from .model import WaveshaperModel


@dataclass
class TrainResult:
    model: WaveshaperModel
    history: list[dict]
    stats_mean: np.ndarray
    stats_std: np.ndarray

    @property
    def initial_loss(self) -> float:
        return self.history[0]["loss"]

    @property
    def final_loss(self) -> float:
        return self.history[-1]["loss"]


def _batch_tensors(segments: list[Segment], mean, std, hop, generator):
    f0 = torch.from_numpy(np.stack([s.f0 for s in segments])).float()
    loud = torch.from_numpy(np.stack([s.loudness for s in segments])).float()
    target = torch.from_numpy(np.stack([s.audio for s in segments])).float()
    controls = torch.stack(
        [(f0 - mean[0]) / std[0], (loud - mean[1]) / std[1]], dim=2
    )
    noise = (
        torch.rand(f0.shape[0], f0.shape[1], hop, generator=generator) * 2.0 - 1.0
    )
    return f0, controls, noise, target


def train(
    dataset: PreparedDataset,
    shape: ModelShape,
    config: TrainConfig = TrainConfig(),
    log_every: int = 50,
) -> TrainResult:
    if not dataset.train:
        raise ValueError("dataset has no training segments")
    if shape.sample_rate != dataset.spec.sample_rate or shape.hop_size != dataset.spec.hop_size:
        raise ValueError("model shape and dataset rates disagree")

    torch.manual_seed(config.seed)
    generator = torch.Generator().manual_seed(config.seed + 1)
    picker = np.random.default_rng(config.seed + 2)

    model = WaveshaperModel(shape)
    criterion = MrStftLoss()
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    scheduler = torch.optim.lr_scheduler.StepLR(
        optimizer, step_size=config.lr_decay_steps, gamma=config.lr_decay
    )
    mean, std = dataset.stats_mean, dataset.stats_std

    history: list[dict] = []
    for step in range(config.iterations):
        picks = picker.integers(0, len(dataset.train), size=min(config.batch_size, len(dataset.train)))
        batch = [dataset.train[i] for i in picks]
        f0, controls, noise, target = _batch_tensors(batch, mean, std, shape.hop_size, generator)

        optimizer.zero_grad()
        rendered = model(f0, controls, noise)
        loss = criterion(target, rendered)
        if not torch.isfinite(loss):
            raise RuntimeError(f"training diverged at step {step}: loss {loss.item()}")
        loss.backward()
        pre_clip = torch.nn.utils.clip_grad_norm_(model.parameters(), config.grad_clip_norm)
        post_clip = _global_grad_norm(model)
        optimizer.step()
        scheduler.step()

        if step % log_every == 0 or step == config.iterations - 1:
            history.append(
                {
                    "step": step,
                    "loss": float(loss.item()),
                    "grad_norm_preclip": float(pre_clip),
                    "grad_norm_postclip": float(post_clip),
                    "lr": scheduler.get_last_lr()[0],
                }
            )
    return TrainResult(model=model, history=history, stats_mean=mean, stats_std=std)


def _global_grad_norm(model: torch.nn.Module) -> float:
    total = 0.0
    for p in model.parameters():
        if p.grad is not None:
            total += float(p.grad.pow(2).sum())
    return total**0.5
