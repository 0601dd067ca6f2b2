"""Time-distributed control MLP: per-frame Linear + LayerNorm + ReLU stacks.

Both the affine-parameter generator and the noise filter network share this
structure. Frames are processed one at a time so that results never depend on
how a longer sequence was blocked.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

LAYER_NORM_EPS = 1e-5


@dataclass(frozen=True)
class MlpLayer:
    weight: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)
    ln_gain: np.ndarray  # (out,)
    ln_bias: np.ndarray  # (out,)


class ControlMlp:
    """Hidden layers of Linear -> LayerNorm -> ReLU, then a plain linear output.

    `output_map`, when given, is applied elementwise to the output layer
    (used by the noise network to squash logits into magnitudes).
    """

    def __init__(
        self,
        hidden: list[MlpLayer],
        out_weight: np.ndarray,
        out_bias: np.ndarray,
        output_map: Callable[[np.ndarray], np.ndarray] | None = None,
    ):
        self.hidden = hidden
        self.out_weight = np.asarray(out_weight, dtype=np.float64)
        self.out_bias = np.asarray(out_bias, dtype=np.float64)
        self.output_map = output_map

    @property
    def input_dim(self) -> int:
        return self.hidden[0].weight.shape[1]

    @property
    def output_dim(self) -> int:
        return self.out_weight.shape[0]

    def forward_frame(self, x: np.ndarray) -> np.ndarray:
        h = x
        for layer in self.hidden:
            h = layer.weight @ h + layer.bias
            mean = h.mean()
            var = ((h - mean) ** 2).mean()
            h = (h - mean) / np.sqrt(var + LAYER_NORM_EPS)
            h = h * layer.ln_gain + layer.ln_bias
            h = np.maximum(h, 0.0)
        y = self.out_weight @ h + self.out_bias
        if self.output_map is not None:
            y = self.output_map(y)
        return y

    def forward(self, z: np.ndarray) -> np.ndarray:
        """Apply the network to every frame of z (num_frames, input_dim)."""
        z = np.atleast_2d(np.asarray(z, dtype=np.float64))
        if z.shape[1] != self.input_dim:
            raise ValueError(
                f"expected input width {self.input_dim}, got {z.shape[1]}"
            )
        out = np.empty((z.shape[0], self.output_dim))
        for k in range(z.shape[0]):
            out[k] = self.forward_frame(z[k])
        return out
