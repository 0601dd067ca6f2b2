"""Multi-resolution spectral training loss.

Per scale: spectral convergence (Frobenius distance over reference norm) plus
L1 log-magnitude distance scaled by 1/window, averaged over window lengths
{512, 1024, 2048} with hop = window / 4, Hann analysis windows, no padding or
centering. Matches the engine's comparison metric definition exactly.
"""

from __future__ import annotations

import torch
from torch import nn

from .model import symmetric_hann_torch

WINDOW_LENGTHS = (512, 1024, 2048)
LOG_EPSILON = 1e-7


class MrStftLoss(nn.Module):
    def __init__(self, window_lengths=WINDOW_LENGTHS, epsilon=LOG_EPSILON):
        super().__init__()
        self.window_lengths = tuple(window_lengths)
        self.epsilon = epsilon
        for m in self.window_lengths:
            self.register_buffer(f"window_{m}", symmetric_hann_torch(m, dtype=torch.float32))

    def _magnitudes(self, x: torch.Tensor, m: int) -> torch.Tensor:
        window = getattr(self, f"window_{m}").to(x.dtype)
        spec = torch.stft(
            x,
            n_fft=m,
            hop_length=m // 4,
            win_length=m,
            window=window,
            center=False,
            return_complex=True,
        )
        return spec.abs()

    def forward(self, reference: torch.Tensor, estimate: torch.Tensor) -> torch.Tensor:
        total = 0.0
        for m in self.window_lengths:
            ref = self._magnitudes(reference, m)
            est = self._magnitudes(estimate, m)
            sc = torch.linalg.norm(ref - est) / torch.linalg.norm(ref)
            log_dist = (
                torch.log(torch.clamp(ref, min=self.epsilon))
                - torch.log(torch.clamp(est, min=self.epsilon))
            ).abs().sum() / (m * ref.shape[0] if ref.dim() == 3 else m)
            total = total + sc + log_dist
        return total / len(self.window_lengths)
