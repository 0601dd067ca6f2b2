"""Export a trained (or freshly initialized) model as a .newt file plus the
fixture bundle consumed by cross-implementation tests: reference forward-pass
outputs for the GRU, the control MLPs, shaper samples, and a full golden
render, all computed from the exported float32 tensors.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch

from .data import Segment, write_control_csv
from .model import WaveshaperModel, export_tensors
from .reference import ReferenceSynth
from .serialize import write_fixture_bundle, write_newt


def export_model(
    directory,
    model: WaveshaperModel,
    stats_mean: np.ndarray,
    stats_std: np.ndarray,
    control: Segment,
    seed: int = 0,
) -> dict:
    """Write model.newt, control.csv, and fixtures/ under `directory`.

    Returns the paths plus the reference render for in-process comparisons.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    shape = model.shape
    tensors = export_tensors(model)

    model_path = directory / "model.newt"
    write_newt(model_path, shape, tensors, stats_mean, stats_std)

    csv_path = directory / "control.csv"
    write_control_csv(csv_path, control)

    synth = ReferenceSynth(tensors, shape)
    render = synth.render(
        control.f0, control.loudness, stats_mean, stats_std, seed=seed
    )

    z_probe = np.linspace(-1.0, 1.0, 8)[:, None] * np.ones(shape.control_dim)[None, :]
    gru_in = torch.from_numpy(
        np.stack([np.linspace(-1, 1, 16), np.linspace(1, -1, 16)], axis=1)
    )
    gru_out = synth._gru(gru_in).numpy()
    affine_out = synth._mlp("affine_mlp", torch.from_numpy(z_probe)).numpy()
    noise_logits = synth._mlp("noise_mlp", torch.from_numpy(z_probe))
    noise_mags = (2.0 * torch.sigmoid(noise_logits) ** np.log(10.0)).numpy()
    shaper_grid = np.linspace(-3.0, 3.0, 64)
    shaper_samples = synth._shape_signal(
        torch.from_numpy(np.tile(shaper_grid, (shape.n_newt_channels, 1)))
    ).numpy()

    write_fixture_bundle(
        directory / "fixtures",
        {
            "gru_input": gru_in.numpy(),
            "gru_hidden": gru_out,
            "affine_probe_z": z_probe,
            "affine_params": affine_out,
            "noise_magnitudes": noise_mags,
            "shaper_grid": shaper_grid,
            "shaper_samples": shaper_samples,
            "golden_render": render.astype(np.float64),
            "control_f0": control.f0,
            "control_loudness": control.loudness,
        },
        extra={"noise_seed": seed, "sample_rate": shape.sample_rate},
    )
    return {
        "model_path": model_path,
        "csv_path": csv_path,
        "fixture_dir": directory / "fixtures",
        "reference_render": render,
    }
