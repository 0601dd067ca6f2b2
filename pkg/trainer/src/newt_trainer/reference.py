"""Float64 evaluation-mode forward pass over exported tensors.

This is the fixture generator and the trainer's side of the parity contract:
it renders from the float32 arrays exactly as written to the weight file,
reproducing the engine's semantics step for step (look-back ramps, per-hop
phase wrapping, strict Nyquist masking, per-frame noise convolution with
overlap-add, dry-plus-wet reverb). The engine rendering the same file with
the same seed must match this output to well below the 1e-4 parity bound.
"""

from __future__ import annotations

import math

import numpy as np
import torch

from .config import ModelShape
from .model import symmetric_hann_torch

TWO_PI = 2.0 * math.pi


def _t(array: np.ndarray) -> torch.Tensor:
    return torch.from_numpy(np.asarray(array, dtype=np.float64))


class ReferenceSynth:
    def __init__(self, tensors: dict[str, np.ndarray], shape: ModelShape):
        self.shape = shape
        self.p = {name: _t(value) for name, value in tensors.items()}
        c, depth = shape.n_newt_channels, shape.shaper_depth
        self.shaper_w = [
            torch.stack([self.p[f"newt.shaper.{i}.layer{j}.weight"] for i in range(c)])
            for j in range(depth)
        ]
        self.shaper_b = [
            torch.stack([self.p[f"newt.shaper.{i}.layer{j}.bias"] for i in range(c)])
            for j in range(depth)
        ]

    def _gru(self, x: torch.Tensor) -> torch.Tensor:
        """Single-layer GRU over (F, 2); gates packed (reset, update, candidate)."""
        d = self.shape.control_dim
        w_ih, w_hh = self.p["control_gru.w_ih"], self.p["control_gru.w_hh"]
        b_ih, b_hh = self.p["control_gru.b_ih"], self.p["control_gru.b_hh"]
        h = torch.zeros(d, dtype=torch.float64)
        out = torch.empty(x.shape[0], d, dtype=torch.float64)
        for k in range(x.shape[0]):
            gi = w_ih @ x[k] + b_ih
            gh = w_hh @ h + b_hh
            r = torch.sigmoid(gi[:d] + gh[:d])
            u = torch.sigmoid(gi[d : 2 * d] + gh[d : 2 * d])
            n = torch.tanh(gi[2 * d :] + r * gh[2 * d :])
            h = (1.0 - u) * n + u * h
            out[k] = h
        return out

    def _mlp(self, prefix: str, z: torch.Tensor) -> torch.Tensor:
        h = z
        for j in range(self.shape.mlp_depth - 1):
            h = h @ self.p[f"{prefix}.layer{j}.weight"].T + self.p[f"{prefix}.layer{j}.bias"]
            mean = h.mean(dim=-1, keepdim=True)
            var = ((h - mean) ** 2).mean(dim=-1, keepdim=True)
            h = (h - mean) / torch.sqrt(var + 1e-5)
            h = torch.relu(h * self.p[f"{prefix}.layer{j}.ln_gain"] + self.p[f"{prefix}.layer{j}.ln_bias"])
        return h @ self.p[f"{prefix}.out.weight"].T + self.p[f"{prefix}.out.bias"]

    def _upsample(self, frames: torch.Tensor) -> torch.Tensor:
        """(F, C) -> (F * hop, C) look-back ramp, first frame held."""
        hop = self.shape.hop_size
        starts = torch.cat([frames[:1], frames[:-1]], dim=0)
        ramp = torch.arange(hop, dtype=torch.float64) / hop
        up = starts.unsqueeze(1) + (frames - starts).unsqueeze(1) * ramp.view(1, hop, 1)
        return up.reshape(frames.shape[0] * hop, frames.shape[1])

    def _exciter(self, f0_up: torch.Tensor) -> torch.Tensor:
        """(N,) audio-rate f0 -> (C, N); phase wraps at every hop boundary."""
        shape = self.shape
        k = torch.arange(1, shape.n_harmonics + 1, dtype=torch.float64).unsqueeze(1)
        weight, bias = self.p["exciter.mixer.weight"], self.p["exciter.mixer.bias"]
        out = torch.empty(weight.shape[0], f0_up.shape[0], dtype=torch.float64)
        phase = 0.0
        for start in range(0, f0_up.shape[0], shape.hop_size):
            chunk = f0_up[start : start + shape.hop_size]
            phi = phase + torch.cumsum(TWO_PI * chunk / shape.sample_rate, dim=0)
            phase = float(torch.remainder(phi[-1], TWO_PI))
            bank = torch.cos(k * phi.unsqueeze(0))
            bank = bank * ((k * chunk.unsqueeze(0)) < (shape.sample_rate / 2)).double()
            out[:, start : start + chunk.shape[0]] = weight @ bank + bias.unsqueeze(1)
        return out

    def _shape_signal(self, v: torch.Tensor) -> torch.Tensor:
        h = v.unsqueeze(-1)
        for j, (w, b) in enumerate(zip(self.shaper_w, self.shaper_b)):
            h = torch.einsum("coi,cni->cno", w, h) + b.unsqueeze(1)
            if j != self.shape.shaper_depth - 1:
                h = torch.sin(h)
        return h.squeeze(-1)

    def _noise(self, mags: torch.Tensor, seed: int) -> torch.Tensor:
        """Per-frame windowed-FIR filtering of Philox white noise, overlap-added.

        Draw order is one hop of uniforms per frame, matching the engine's
        generator stream exactly.
        """
        shape = self.shape
        taps, hop = shape.noise_fir_taps, shape.hop_size
        rng = np.random.Generator(np.random.Philox(seed))
        window = symmetric_hann_torch(taps)
        num_frames = mags.shape[0]
        out = torch.zeros(num_frames * hop, dtype=torch.float64)
        tail = torch.zeros(taps - 1, dtype=torch.float64)
        nfft = 512
        while nfft < hop + taps - 1:
            nfft *= 2
        for j in range(num_frames):
            noise = _t(rng.uniform(-1.0, 1.0, hop))
            ir = torch.fft.irfft(torch.complex(mags[j], torch.zeros_like(mags[j])), n=taps)
            ir = torch.roll(ir, taps // 2) * window
            y = torch.fft.irfft(torch.fft.rfft(noise, nfft) * torch.fft.rfft(ir, nfft), nfft)[
                : hop + taps - 1
            ]
            y = y.clone()
            y[: taps - 1] += tail
            out[j * hop : (j + 1) * hop] = y[:hop]
            tail = y[hop:]
        return out

    def render(
        self,
        f0: np.ndarray,
        loudness: np.ndarray,
        stats_mean: np.ndarray,
        stats_std: np.ndarray,
        seed: int = 0,
        enable_reverb: bool = True,
        use_tables: dict | None = None,
    ) -> np.ndarray:
        shape = self.shape
        f0_t, loud_t = _t(f0), _t(loudness)
        controls = torch.stack(
            [
                (f0_t - stats_mean[0]) / stats_std[0],
                (loud_t - stats_mean[1]) / stats_std[1],
            ],
            dim=1,
        )
        z = self._gru(controls) @ self.p["control_dense.weight"].T + self.p["control_dense.bias"]
        planes = self._mlp("affine_mlp", z)
        mags = 2.0 * torch.sigmoid(self._mlp("noise_mlp", z)) ** math.log(10.0)

        c = shape.n_newt_channels
        f0_up = self._upsample(f0_t.unsqueeze(1))[:, 0]
        planes_up = self._upsample(planes).T  # (4C, N)
        in_gain, in_bias = planes_up[0:c], planes_up[c : 2 * c]
        out_gain, out_bias = planes_up[2 * c : 3 * c], planes_up[3 * c :]

        exciter = self._exciter(f0_up)
        shaped = self._shape_signal(in_gain * exciter + in_bias)
        dry = (out_gain * shaped + out_bias).sum(dim=0) + self._noise(mags, seed)

        if enable_reverb:
            ir = self.p["reverb.ir"]
            n = dry.shape[0]
            nfft = 1
            while nfft < n + ir.shape[0] - 1:
                nfft *= 2
            wet = torch.fft.irfft(torch.fft.rfft(dry, nfft) * torch.fft.rfft(ir, nfft), nfft)[:n]
            dry = dry + wet
        return dry.numpy()
