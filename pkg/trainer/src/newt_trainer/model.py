"""Differentiable synthesizer for training, mirroring the engine conventions
in docs/format.md: gate packing, layer-norm placement, the look-back
upsampling ramp, Nyquist masking, channel summation, and the noise and reverb
signal paths. The export mapping at the bottom produces the engine's tensor
schema directly from this module's parameters.
"""

from __future__ import annotations

import math

import numpy as np
import torch
from torch import nn

from .config import ModelShape

MAGNITUDE_EXPONENT = math.log(10.0)


def symmetric_hann_torch(length: int, dtype=torch.float64) -> torch.Tensor:
    if length == 1:
        return torch.ones(1, dtype=dtype)
    n = torch.arange((length + 1) // 2, dtype=dtype)
    half = 0.5 - 0.5 * torch.cos(2.0 * math.pi * n / (length - 1))
    return torch.cat([half, half[: length // 2].flip(0)])


def lookback_upsample(frames: torch.Tensor, hop: int) -> torch.Tensor:
    """(B, F, C) frame values to (B, F*hop, C) samples.

    Samples under frame k ramp linearly from frame k-1 to frame k; the first
    frame is held constant. Matches the engine's causal upsampling exactly.
    """
    starts = torch.cat([frames[:, :1], frames[:, :-1]], dim=1)
    ramp = torch.arange(hop, dtype=frames.dtype, device=frames.device) / hop
    up = starts.unsqueeze(2) + (frames - starts).unsqueeze(2) * ramp.view(1, 1, hop, 1)
    b, f, _, c = up.shape
    return up.reshape(b, f * hop, c)


def control_mlp(in_dim: int, hidden: int, depth: int, out_dim: int) -> nn.Sequential:
    layers: list[nn.Module] = []
    d = in_dim
    for _ in range(depth - 1):
        layers.extend([nn.Linear(d, hidden), nn.LayerNorm(hidden), nn.ReLU()])
        d = hidden
    layers.append(nn.Linear(d, out_dim))
    return nn.Sequential(*layers)


class ShaperStack(nn.Module):
    """All per-channel shaper MLPs as stacked (channels, out, in) parameters;
    sine after every layer except the last."""

    def __init__(self, shape: ModelShape):
        super().__init__()
        self.depth = shape.shaper_depth
        h = shape.shaper_hidden
        c = shape.n_newt_channels
        self.weights = nn.ParameterList()
        self.biases = nn.ParameterList()
        for j in range(self.depth):
            out_w = 1 if j == self.depth - 1 else h
            in_w = 1 if j == 0 else h
            if j == 0:
                scale = 3.0
            elif j == self.depth - 1:
                scale = 0.3
            else:
                scale = math.sqrt(6.0 / h)
            weight = torch.empty(c, out_w, in_w).uniform_(-scale, scale)
            bias = (
                torch.empty(c, out_w).uniform_(-math.pi, math.pi)
                if j == 0
                else torch.zeros(c, out_w)
            )
            self.weights.append(nn.Parameter(weight))
            self.biases.append(nn.Parameter(bias))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        # x: (B, C, N) -> (B, C, N)
        h = x.unsqueeze(-1)
        for j, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = torch.einsum("coi,bcni->bcno", w, h) + b.unsqueeze(1)
            if j != self.depth - 1:
                h = torch.sin(h)
        return h.squeeze(-1)


class WaveshaperModel(nn.Module):
    def __init__(self, shape: ModelShape):
        super().__init__()
        self.shape = shape
        d = shape.control_dim
        c = shape.n_newt_channels

        self.gru = nn.GRU(2, d, batch_first=True)
        self.dense = nn.Linear(d, d)
        self.affine_mlp = control_mlp(d, shape.mlp_hidden, shape.mlp_depth, 4 * c)
        self.noise_mlp = control_mlp(d, shape.mlp_hidden, shape.mlp_depth, shape.noise_bins)
        self.shapers = ShaperStack(shape)
        self.mixer = nn.Linear(shape.n_harmonics, c)
        self.ir_tail = nn.Parameter(torch.randn(shape.reverb_length - 1) * 1e-3)

        # operating point of the untrained model: moderate input gain, small
        # output gain, quiet noise floor
        with torch.no_grad():
            out_linear = self.affine_mlp[-1]
            out_linear.weight.mul_(0.1)
            out_linear.bias.zero_()
            out_linear.bias[0:c] = 0.5
            out_linear.bias[2 * c : 3 * c] = 0.05
            noise_out = self.noise_mlp[-1]
            noise_out.weight.mul_(0.1)
            noise_out.bias.fill_(-2.0)
            self.mixer.weight.uniform_(-0.5 / math.sqrt(shape.n_harmonics), 0.5 / math.sqrt(shape.n_harmonics))
            self.mixer.bias.zero_()

    @property
    def impulse_response(self) -> torch.Tensor:
        zero = torch.zeros(1, dtype=self.ir_tail.dtype, device=self.ir_tail.device)
        return torch.cat([zero, self.ir_tail])

    def embed(self, controls_std: torch.Tensor) -> torch.Tensor:
        out, _ = self.gru(controls_std)
        return self.dense(out)

    def exciter_bank(self, f0_up: torch.Tensor) -> torch.Tensor:
        """Antialiased harmonic cosines from per-sample f0; no gradient flows
        through the oscillator itself."""
        shape = self.shape
        with torch.no_grad():
            k = torch.arange(1, shape.n_harmonics + 1, dtype=f0_up.dtype, device=f0_up.device)
            phase = torch.cumsum(
                2.0 * math.pi * f0_up.double() / shape.sample_rate, dim=1
            ).to(f0_up.dtype)
            args = k.view(1, -1, 1) * phase.unsqueeze(1)
            mask = (k.view(1, -1, 1) * f0_up.unsqueeze(1)) < (shape.sample_rate / 2)
            return torch.cos(args) * mask.to(f0_up.dtype)

    def render_noise(self, mags: torch.Tensor, noise: torch.Tensor) -> torch.Tensor:
        """(B, F, bins) magnitudes + (B, F, hop) white noise -> (B, F*hop)."""
        shape = self.shape
        taps, hop = shape.noise_fir_taps, shape.hop_size
        b, f, _ = mags.shape
        # zero-phase spectrum: real magnitudes with zero imaginary part
        ir = torch.fft.irfft(torch.complex(mags, torch.zeros_like(mags)), n=taps, dim=-1)
        ir = torch.roll(ir, taps // 2, dims=-1)
        ir = ir * symmetric_hann_torch(taps, dtype=mags.dtype).to(mags.device)

        full = hop + taps - 1
        nfft = 1
        while nfft < full:
            nfft *= 2
        conv = torch.fft.irfft(
            torch.fft.rfft(noise, nfft, dim=-1) * torch.fft.rfft(ir, nfft, dim=-1), nfft, dim=-1
        )[..., :full]
        # overlap-add the per-frame convolutions at hop offsets
        folded = torch.nn.functional.fold(
            conv.permute(0, 2, 1),
            output_size=(1, (f - 1) * hop + full),
            kernel_size=(1, full),
            stride=(1, hop),
        )
        return folded[:, 0, 0, : f * hop]

    def apply_reverb(self, dry: torch.Tensor) -> torch.Tensor:
        n = dry.shape[-1]
        ir = self.impulse_response
        nfft = 1
        while nfft < n + ir.shape[0] - 1:
            nfft *= 2
        wet = torch.fft.irfft(
            torch.fft.rfft(dry, nfft, dim=-1) * torch.fft.rfft(ir, nfft), nfft, dim=-1
        )[..., :n]
        return dry + wet

    def forward(
        self,
        f0: torch.Tensor,
        controls_std: torch.Tensor,
        noise: torch.Tensor,
        enable_reverb: bool = True,
    ) -> torch.Tensor:
        """f0 (B, F) in Hz, standardized controls (B, F, 2), white noise
        (B, F, hop) in [-1, 1]; returns audio (B, F * hop)."""
        shape = self.shape
        c = shape.n_newt_channels
        hop = shape.hop_size

        z = self.embed(controls_std)
        planes = self.affine_mlp(z)  # (B, F, 4C)
        mags = 2.0 * torch.sigmoid(self.noise_mlp(z)) ** MAGNITUDE_EXPONENT

        f0_up = lookback_upsample(f0.unsqueeze(-1), hop)[..., 0]  # (B, N)
        planes_up = lookback_upsample(planes, hop).permute(0, 2, 1)  # (B, 4C, N)
        in_gain, in_bias = planes_up[:, 0:c], planes_up[:, c : 2 * c]
        out_gain, out_bias = planes_up[:, 2 * c : 3 * c], planes_up[:, 3 * c :]

        bank = self.exciter_bank(f0_up)  # (B, K, N)
        y = torch.einsum("ck,bkn->bcn", self.mixer.weight, bank) + self.mixer.bias.view(1, -1, 1)

        shaped = self.shapers(in_gain * y + in_bias)
        dry = (out_gain * shaped + out_bias).sum(dim=1) + self.render_noise(mags, noise)
        return self.apply_reverb(dry) if enable_reverb else dry

    def parameter_total(self) -> int:
        # +1 for the fixed leading zero of the stored impulse response
        return sum(p.numel() for p in self.parameters()) + 1


def export_tensors(model: WaveshaperModel) -> dict[str, np.ndarray]:
    """Map module parameters onto the engine's tensor name schema."""
    shape = model.shape
    state: dict[str, np.ndarray] = {}

    def grab(tensor: torch.Tensor) -> np.ndarray:
        return tensor.detach().cpu().numpy().astype(np.float32)

    state["control_gru.w_ih"] = grab(model.gru.weight_ih_l0)
    state["control_gru.w_hh"] = grab(model.gru.weight_hh_l0)
    state["control_gru.b_ih"] = grab(model.gru.bias_ih_l0)
    state["control_gru.b_hh"] = grab(model.gru.bias_hh_l0)
    state["control_dense.weight"] = grab(model.dense.weight)
    state["control_dense.bias"] = grab(model.dense.bias)

    for prefix, mlp in (("affine_mlp", model.affine_mlp), ("noise_mlp", model.noise_mlp)):
        hidden = [m for m in mlp if isinstance(m, nn.Linear)][:-1]
        norms = [m for m in mlp if isinstance(m, nn.LayerNorm)]
        for j, (linear, norm) in enumerate(zip(hidden, norms)):
            state[f"{prefix}.layer{j}.weight"] = grab(linear.weight)
            state[f"{prefix}.layer{j}.bias"] = grab(linear.bias)
            state[f"{prefix}.layer{j}.ln_gain"] = grab(norm.weight)
            state[f"{prefix}.layer{j}.ln_bias"] = grab(norm.bias)
        state[f"{prefix}.out.weight"] = grab(mlp[-1].weight)
        state[f"{prefix}.out.bias"] = grab(mlp[-1].bias)

    for i in range(shape.n_newt_channels):
        for j in range(shape.shaper_depth):
            state[f"newt.shaper.{i}.layer{j}.weight"] = grab(model.shapers.weights[j][i])
            state[f"newt.shaper.{i}.layer{j}.bias"] = grab(model.shapers.biases[j][i])

    state["exciter.mixer.weight"] = grab(model.mixer.weight)
    state["exciter.mixer.bias"] = grab(model.mixer.bias)
    state["reverb.ir"] = grab(model.impulse_response)
    return state
