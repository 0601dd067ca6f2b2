"""Waveshaping core: the learned shaper bank, its lookup-table fast path, and
the affine wrapping that turns shapers into a playable synthesizer.

Each of the parallel channels applies, samplewise,

    out = out_gain * f(in_gain * y + in_bias) + out_bias

where f is either a small sine-activation MLP or a baked lookup table, and the
four affine planes are generated from the control embedding by a shared MLP.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mlp import ControlMlp

DEFAULT_TABLE_SIZE = 4096
DEFAULT_TABLE_DOMAIN = (-3.0, 3.0)


class ShaperBank:
    """Bank of per-channel scalar MLPs, widths 1 -> hidden.. -> 1, with sine
    activations after every layer except the last.

    Weights are stored input-side transposed and stacked across channels:
    layer l is a (channels, in_l, out_l) array so a whole chunk of samples can
    be shaped with batched matmuls.
    """

    def __init__(self, weights: list[np.ndarray], biases: list[np.ndarray]):
        if len(weights) != len(biases) or len(weights) < 2:
            raise ValueError("shaper bank needs at least two stacked layers")
        self.weights = [np.asarray(w, dtype=np.float64) for w in weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in biases]
        if self.weights[0].shape[1] != 1 or self.weights[-1].shape[2] != 1:
            raise ValueError("shaper maps scalars to scalars")

    @classmethod
    def from_layers(cls, per_channel: list[list[tuple[np.ndarray, np.ndarray]]]) -> "ShaperBank":
        """Build from per_channel[i][l] = (weight (out, in), bias (out,))."""
        depth = len(per_channel[0])
        weights, biases = [], []
        for l in range(depth):
            weights.append(np.stack([np.asarray(ch[l][0]).T for ch in per_channel]))
            biases.append(np.stack([np.asarray(ch[l][1])[None, :] for ch in per_channel]))
        return cls(weights, biases)

    @property
    def n_channels(self) -> int:
        return self.weights[0].shape[0]

    @property
    def depth(self) -> int:
        return len(self.weights)

    def eval(self, x: np.ndarray) -> np.ndarray:
        """Shape a (channels, n) block samplewise; returns (channels, n)."""
        x = np.asarray(x, dtype=np.float64)
        h = x[..., None]  # (channels, n, 1)
        last = self.depth - 1
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if l != last:
                h = np.sin(h)
        return h[..., 0]

    def _eval_one(self, x: np.ndarray, channel: int) -> np.ndarray:
        """Shape a 1-D array of inputs through a single channel."""
        h = np.asarray(x, dtype=np.float64)[:, None]
        last = self.depth - 1
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w[channel] + b[channel]
            if l != last:
                h = np.sin(h)
        return h[:, 0]


def shaper_eval(x, bank: ShaperBank, channel: int = 0):
    """Evaluate one shaping function at x (scalar or array)."""
    arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = bank._eval_one(arr, channel)
    return float(out[0]) if np.isscalar(x) or np.ndim(x) == 0 else out


@dataclass(frozen=True)
class FastNewtTable:
    """Sampled shaping function over a closed interval, linearly interpolated."""

    values: np.ndarray
    lo: float
    hi: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.size < 2:
            raise ValueError("lookup table needs at least two samples")
        if not self.lo < self.hi:
            raise ValueError("table domain must satisfy lo < hi")
        if not np.all(np.isfinite(values)):
            raise ValueError("table values must be finite")
        object.__setattr__(self, "values", values)

    @property
    def size(self) -> int:
        return self.values.size


class FastNewtTableBank:
    """Stacked per-channel lookup tables sharing one domain."""

    def __init__(self, values: np.ndarray, lo: float, hi: float):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] < 2:
            raise ValueError("table bank must be (channels, table_size >= 2)")
        if not lo < hi:
            raise ValueError("table domain must satisfy lo < hi")
        self.values = values
        self.lo = float(lo)
        self.hi = float(hi)
        self._scale = (values.shape[1] - 1) / (self.hi - self.lo)

    @property
    def n_channels(self) -> int:
        return self.values.shape[0]

    @property
    def table_size(self) -> int:
        return self.values.shape[1]

    def channel(self, i: int) -> FastNewtTable:
        return FastNewtTable(self.values[i], self.lo, self.hi)

    def lookup(self, x: np.ndarray) -> np.ndarray:
        """Interpolated lookup for a (channels, n) block; out-of-domain inputs
        clamp to the endpoint values."""
        x = np.asarray(x, dtype=np.float64)
        u = np.clip((x - self.lo) * self._scale, 0.0, self.table_size - 1)
        idx = np.minimum(u.astype(np.int64), self.table_size - 2)
        frac = u - idx
        lo_vals = np.take_along_axis(self.values, idx, axis=1)
        hi_vals = np.take_along_axis(self.values, idx + 1, axis=1)
        return lo_vals + frac * (hi_vals - lo_vals)


def table_lookup(x, table: FastNewtTable):
    """Linear-interpolated read from a single-channel table with endpoint clamping."""
    bank = FastNewtTableBank(table.values[None, :], table.lo, table.hi)
    arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = bank.lookup(arr[None, :])[0]
    return float(out[0]) if np.ndim(x) == 0 else out


def bake_fastnewt(
    bank: ShaperBank,
    channel: int,
    table_size: int = DEFAULT_TABLE_SIZE,
    domain: tuple[float, float] = DEFAULT_TABLE_DOMAIN,
) -> FastNewtTable:
    """Sample one shaping function on a uniform grid over the domain.

    Endpoints are sampled exactly: table[j] = f(lo + j * (hi - lo) / (size - 1)).
    """
    lo, hi = float(domain[0]), float(domain[1])
    if table_size < 2:
        raise ValueError("table_size must be >= 2")
    if not lo < hi:
        raise ValueError("table domain must satisfy lo < hi")
    grid = np.linspace(lo, hi, table_size)
    return FastNewtTable(bank._eval_one(grid, channel), lo, hi)


def bake_bank(
    bank: ShaperBank,
    table_size: int = DEFAULT_TABLE_SIZE,
    domain: tuple[float, float] = DEFAULT_TABLE_DOMAIN,
) -> FastNewtTableBank:
    tables = [bake_fastnewt(bank, i, table_size, domain) for i in range(bank.n_channels)]
    return FastNewtTableBank(np.stack([t.values for t in tables]), float(domain[0]), float(domain[1]))


def bake_error_report(
    bank: ShaperBank, tables: FastNewtTableBank, probe_factor: int = 16
) -> list[dict]:
    """Per-channel max |table - shaper| over a dense probe grid.

    The grid is probe_factor times finer than the table; errors are reported
    both absolutely and relative to the shaper's output range on the grid.
    """
    probe = np.linspace(tables.lo, tables.hi, (tables.table_size - 1) * probe_factor + 1)
    report = []
    for i in range(bank.n_channels):
        exact = bank._eval_one(probe, i)
        approx = table_lookup(probe, tables.channel(i))
        max_err = float(np.max(np.abs(exact - approx)))
        out_range = float(exact.max() - exact.min())
        rel = max_err / out_range if out_range > 0 else (0.0 if max_err == 0 else np.inf)
        report.append(
            {"channel": i, "max_abs_error": max_err, "output_range": out_range, "relative_error": rel}
        )
    return report


@dataclass(frozen=True)
class AffineParams:
    """Frame-rate affine planes, each (num_frames, channels)."""

    in_gain: np.ndarray
    in_bias: np.ndarray
    out_gain: np.ndarray
    out_bias: np.ndarray

    def __post_init__(self):
        shapes = {p.shape for p in (self.in_gain, self.in_bias, self.out_gain, self.out_bias)}
        if len(shapes) != 1:
            raise ValueError("affine parameter planes must share one shape")

    @property
    def num_frames(self) -> int:
        return self.in_gain.shape[0]

    @property
    def n_channels(self) -> int:
        return self.in_gain.shape[1]

    def stacked(self) -> np.ndarray:
        """Planes concatenated along channels: (num_frames, 4 * channels)."""
        return np.concatenate([self.in_gain, self.in_bias, self.out_gain, self.out_bias], axis=1)


def split_affine_planes(raw: np.ndarray, n_channels: int) -> AffineParams:
    """Split MLP output (num_frames, 4 * channels) into the four planes in
    order: input gain, input bias, output gain, output bias."""
    if raw.shape[1] != 4 * n_channels:
        raise ValueError(f"expected width {4 * n_channels}, got {raw.shape[1]}")
    c = n_channels
    return AffineParams(
        in_gain=raw[:, 0:c],
        in_bias=raw[:, c : 2 * c],
        out_gain=raw[:, 2 * c : 3 * c],
        out_bias=raw[:, 3 * c :],
    )


def affine_mlp_forward(z: np.ndarray, mlp: ControlMlp, n_channels: int) -> AffineParams:
    """Generate the affine planes from the control embedding."""
    return split_affine_planes(mlp.forward(z), n_channels)


def newt_apply(
    exciter: np.ndarray,
    in_gain: np.ndarray,
    in_bias: np.ndarray,
    out_gain: np.ndarray,
    out_bias: np.ndarray,
    shapers: ShaperBank | FastNewtTableBank,
) -> np.ndarray:
    """Apply the shaping stage samplewise to a (channels, n) exciter block.

    All four parameter arrays must already be at audio rate with matching
    shape. Returns per-channel outputs (channels, n); the operation is
    memoryless, so each output sample depends only on its own inputs.
    """
    v = in_gain * exciter + in_bias
    shaped = shapers.lookup(v) if isinstance(shapers, FastNewtTableBank) else shapers.eval(v)
    return out_gain * shaped + out_bias


def newt_forward(
    exciter: np.ndarray,
    params: AffineParams,
    shapers: ShaperBank | FastNewtTableBank,
    hop_size: int,
) -> np.ndarray:
    """Shape a whole exciter block with frame-rate params and sum to mono.

    Params are upsampled with the standard anchored interpolation (frame k at
    sample k * hop_size, end-hold after the last frame); channels are summed.
    """
    from .dsp import FrameSeries, upsample_linear

    n_channels, n = exciter.shape
    if params.num_frames * hop_size != n:
        raise ValueError("exciter length must equal num_frames * hop_size")
    planes = upsample_linear(
        FrameSeries(values=params.stacked(), hop_size=hop_size, sample_rate=1)
    )
    c = n_channels
    out = newt_apply(
        exciter, planes[0:c], planes[c : 2 * c], planes[2 * c : 3 * c], planes[3 * c :], shapers
    )
    return out.sum(axis=0)
