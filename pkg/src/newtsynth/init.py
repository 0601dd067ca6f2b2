"""Random model initialization for fixtures, demos, and benchmarks.

Produces a complete tensor set for any ModelConfig, scaled so that an
untrained model renders bounded, spectrally interesting audio: shaper inputs
stay inside the default lookup-table domain and the noise floor sits well
below the harmonic content.
"""

from __future__ import annotations

import numpy as np

from .reverb import init_reverb_ir
from .weights import CONTROL_CHANNELS, ModelConfig, NormalizationStats, required_tensor_shapes


def random_tensors(config: ModelConfig, seed: int = 0) -> dict[str, np.ndarray]:
    rng = np.random.Generator(np.random.Philox(seed))
    d = config.control_dim
    tensors: dict[str, np.ndarray] = {}

    def uniform(shape, scale):
        return rng.uniform(-scale, scale, shape)

    k = 1.0 / np.sqrt(d)
    tensors["control_gru.w_ih"] = uniform((3 * d, CONTROL_CHANNELS), k)
    tensors["control_gru.w_hh"] = uniform((3 * d, d), k)
    tensors["control_gru.b_ih"] = uniform((3 * d,), k)
    tensors["control_gru.b_hh"] = uniform((3 * d,), k)
    tensors["control_dense.weight"] = uniform((d, d), k)
    tensors["control_dense.bias"] = uniform((d,), k)

    for prefix, out_dim in (
        ("affine_mlp", 4 * config.n_newt_channels),
        ("noise_mlp", config.noise_bins),
    ):
        in_dim = d
        for j in range(config.mlp_depth - 1):
            tensors[f"{prefix}.layer{j}.weight"] = uniform(
                (config.mlp_hidden, in_dim), 1.0 / np.sqrt(in_dim)
            )
            tensors[f"{prefix}.layer{j}.bias"] = np.zeros(config.mlp_hidden)
            tensors[f"{prefix}.layer{j}.ln_gain"] = np.ones(config.mlp_hidden)
            tensors[f"{prefix}.layer{j}.ln_bias"] = np.zeros(config.mlp_hidden)
            in_dim = config.mlp_hidden
        tensors[f"{prefix}.out.weight"] = uniform((out_dim, config.mlp_hidden), 0.02)
        tensors[f"{prefix}.out.bias"] = np.zeros(out_dim)

    # Output-layer biases pick the operating point of the untrained model:
    # moderate input gain keeps shaper inputs inside the table domain, small
    # output gain keeps the 64-channel sum near unit level, and a negative
    # noise logit keeps the residual path quiet.
    c = config.n_newt_channels
    affine_bias = tensors["affine_mlp.out.bias"]
    affine_bias[0:c] = 0.5  # input gain
    affine_bias[2 * c : 3 * c] = 0.05  # output gain
    tensors["noise_mlp.out.bias"][:] = -2.0

    h = config.shaper_hidden
    for i in range(c):
        for j in range(config.shaper_depth):
            name = f"newt.shaper.{i}.layer{j}"
            if j == 0:
                tensors[f"{name}.weight"] = uniform((h, 1), 3.0)
                tensors[f"{name}.bias"] = uniform((h,), np.pi)
            elif j == config.shaper_depth - 1:
                tensors[f"{name}.weight"] = uniform((1, h), 0.3)
                tensors[f"{name}.bias"] = np.zeros(1)
            else:
                tensors[f"{name}.weight"] = uniform((h, h), np.sqrt(6.0 / h))
                tensors[f"{name}.bias"] = np.zeros(h)

    tensors["exciter.mixer.weight"] = uniform(
        (c, config.n_harmonics), 0.5 / np.sqrt(config.n_harmonics)
    )
    tensors["exciter.mixer.bias"] = np.zeros(c)
    tensors["reverb.ir"] = init_reverb_ir(config.reverb_length, seed).c

    expected = set(required_tensor_shapes(config))
    assert set(tensors) == expected, "random init out of sync with the tensor manifest"
    return tensors


def default_stats() -> NormalizationStats:
    return NormalizationStats(mean=np.array([300.0, -30.0]), std=np.array([150.0, 15.0]))


def random_model(config: ModelConfig | None = None, seed: int = 0):
    """(config, tensors, stats) triple ready for save_model."""
    config = config or ModelConfig()
    return config, random_tensors(config, seed), default_stats()
