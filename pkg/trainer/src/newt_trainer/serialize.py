"""Writers for the engine's external formats: .newt weight files and fixture
bundles (raw little-endian float arrays plus a JSON manifest).

The container layout is specified in the engine repo's docs/format.md; this
module re-implements it rather than importing the engine, since the byte
format is the contract between the two codebases.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .config import ModelShape

MAGIC = b"NEWT"
FORMAT_VERSION = 1


def newt_bytes(
    shape: ModelShape,
    tensors: dict[str, np.ndarray],
    stats_mean: np.ndarray,
    stats_std: np.ndarray,
    table_domain: tuple[float, float] | None = None,
) -> bytes:
    store = {name: np.ascontiguousarray(t, dtype="<f4") for name, t in tensors.items()}
    order = sorted(store)
    meta = {
        "config": asdict(shape),
        "stats": {"mean": [float(v) for v in stats_mean], "std": [float(v) for v in stats_std]},
        "tensors": [{"name": name, "shape": list(store[name].shape)} for name in order],
    }
    if table_domain is not None:
        meta["fastnewt"] = {"lo": float(table_domain[0]), "hi": float(table_domain[1])}
    blob = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode("utf-8")
    parts = [MAGIC, np.uint32(FORMAT_VERSION).tobytes(), np.uint32(len(blob)).tobytes(), blob]
    parts.extend(store[name].tobytes() for name in order)
    return b"".join(parts)


def write_newt(path, shape, tensors, stats_mean, stats_std, table_domain=None) -> None:
    if tensors["reverb.ir"][0] != 0.0:
        raise ValueError("refusing to export an impulse response with a nonzero first sample")
    Path(path).write_bytes(newt_bytes(shape, tensors, stats_mean, stats_std, table_domain))


def write_fixture_bundle(directory, arrays: dict[str, np.ndarray], extra: dict | None = None) -> None:
    """Write named arrays as raw little-endian floats next to a manifest.

    float32 arrays get a .f32 extension, float64 a .f64; the manifest records
    name, dtype, shape, and file, plus any extra scalar metadata.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {"arrays": [], "extra": extra or {}}
    for name, array in sorted(arrays.items()):
        array = np.asarray(array)
        if array.dtype == np.float64:
            dtype, suffix = "<f8", "f64"
        else:
            array = array.astype(np.float32)
            dtype, suffix = "<f4", "f32"
        filename = f"{name}.{suffix}"
        (directory / filename).write_bytes(np.ascontiguousarray(array, dtype=dtype).tobytes())
        manifest["arrays"].append(
            {"name": name, "dtype": dtype, "shape": list(array.shape), "file": filename}
        )
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def read_fixture_bundle(directory) -> dict[str, np.ndarray]:
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text())
    arrays = {}
    for entry in manifest["arrays"]:
        raw = (directory / entry["file"]).read_bytes()
        arrays[entry["name"]] = np.frombuffer(raw, dtype=entry["dtype"]).reshape(entry["shape"]).copy()
    return arrays
