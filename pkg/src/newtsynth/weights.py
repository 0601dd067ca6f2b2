"""The portable .newt weight file: hyperparameters, named tensors,
normalization statistics, and optional baked lookup tables.

Layout (everything little-endian):

    bytes 0..3    magic "NEWT"
    bytes 4..7    format version, uint32 (currently 1)
    bytes 8..11   metadata length, uint32
    then          UTF-8 JSON metadata
    then          raw float32 tensor payloads, row-major, in manifest order

The JSON block carries the model config, per-channel control normalization
stats, the tensor manifest (name + shape, sorted by name), and the lookup
table domain when tables are embedded. Serialization is canonical, so
save(load(b)) == b for every valid file.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Mapping

import numpy as np

from .errors import FormatError, SchemaError
from .newt import FastNewtTableBank

MAGIC = b"NEWT"
FORMAT_VERSION = 1
CONTROL_CHANNELS = 2  # fundamental frequency, loudness


@dataclass(frozen=True)
class ModelConfig:
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
    reverb_length: int | None = None  # defaults to 2 seconds of samples

    def __post_init__(self):
        if self.reverb_length is None:
            object.__setattr__(self, "reverb_length", 2 * self.sample_rate)
        for name, value in asdict(self).items():
            if value < 1:
                raise SchemaError(f"config field {name} must be >= 1, got {value}")
        if self.mlp_depth < 2 or self.shaper_depth < 2:
            raise SchemaError("mlp_depth and shaper_depth must be >= 2")
        if self.noise_fir_taps % 2 != 0:
            raise SchemaError("noise_fir_taps must be even")

    @property
    def noise_bins(self) -> int:
        return self.noise_fir_taps // 2 + 1


@dataclass(frozen=True)
class NormalizationStats:
    """Per-channel mean/std for the (f0, loudness) control inputs."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        std = np.asarray(self.std, dtype=np.float64)
        if mean.shape != (CONTROL_CHANNELS,) or std.shape != (CONTROL_CHANNELS,):
            raise SchemaError("normalization stats must have one value per control channel")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(std))):
            raise SchemaError("normalization stats must be finite")
        if np.any(std <= 0):
            raise SchemaError("normalization std must be positive")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)


@dataclass(frozen=True)
class LoadedModel:
    config: ModelConfig
    tensors: dict[str, np.ndarray]
    stats: NormalizationStats
    tables: FastNewtTableBank | None = None


def _mlp_tensor_shapes(prefix: str, config: ModelConfig, out_dim: int) -> dict[str, tuple]:
    shapes: dict[str, tuple] = {}
    in_dim = config.control_dim
    for j in range(config.mlp_depth - 1):
        shapes[f"{prefix}.layer{j}.weight"] = (config.mlp_hidden, in_dim)
        shapes[f"{prefix}.layer{j}.bias"] = (config.mlp_hidden,)
        shapes[f"{prefix}.layer{j}.ln_gain"] = (config.mlp_hidden,)
        shapes[f"{prefix}.layer{j}.ln_bias"] = (config.mlp_hidden,)
        in_dim = config.mlp_hidden
    shapes[f"{prefix}.out.weight"] = (out_dim, config.mlp_hidden)
    shapes[f"{prefix}.out.bias"] = (out_dim,)
    return shapes


def shaper_tensor_shapes(config: ModelConfig) -> dict[str, tuple]:
    """Shapes of the per-channel shaper MLP tensors (optional when tables are baked)."""
    shapes: dict[str, tuple] = {}
    h = config.shaper_hidden
    for i in range(config.n_newt_channels):
        for j in range(config.shaper_depth):
            out_w = 1 if j == config.shaper_depth - 1 else h
            in_w = 1 if j == 0 else h
            shapes[f"newt.shaper.{i}.layer{j}.weight"] = (out_w, in_w)
            shapes[f"newt.shaper.{i}.layer{j}.bias"] = (out_w,)
    return shapes


def required_tensor_shapes(config: ModelConfig) -> dict[str, tuple]:
    """Every tensor the forward graph needs, mapped to its required shape.

    The shaper MLP group is included here; a file may omit it only when a
    complete set of baked tables is present instead.
    """
    d = config.control_dim
    shapes: dict[str, tuple] = {
        "control_gru.w_ih": (3 * d, CONTROL_CHANNELS),
        "control_gru.w_hh": (3 * d, d),
        "control_gru.b_ih": (3 * d,),
        "control_gru.b_hh": (3 * d,),
        "control_dense.weight": (d, d),
        "control_dense.bias": (d,),
        "exciter.mixer.weight": (config.n_newt_channels, config.n_harmonics),
        "exciter.mixer.bias": (config.n_newt_channels,),
        "reverb.ir": (config.reverb_length,),
    }
    shapes.update(_mlp_tensor_shapes("affine_mlp", config, 4 * config.n_newt_channels))
    shapes.update(_mlp_tensor_shapes("noise_mlp", config, config.noise_bins))
    shapes.update(shaper_tensor_shapes(config))
    return shapes


def table_tensor_names(config: ModelConfig) -> list[str]:
    return [f"newt.table.{i}" for i in range(config.n_newt_channels)]


def parameter_count(config: ModelConfig) -> int:
    """Total scalar count across the required tensor manifest."""
    return sum(math.prod(shape) for shape in required_tensor_shapes(config).values())


def _check_store(
    config: ModelConfig, tensors: Mapping[str, np.ndarray], tables: FastNewtTableBank | None
) -> list[str]:
    """Validate names and shapes; returns the canonical (sorted) tensor order."""
    required = required_tensor_shapes(config)
    shaper_names = set(shaper_tensor_shapes(config))
    table_names = table_tensor_names(config)

    present = set(tensors)
    has_shapers = bool(present & shaper_names)
    if has_shapers:
        missing = shaper_names - present
        if missing:
            raise SchemaError(f"missing required tensor: {sorted(missing)[0]}")

    expected = dict(required)
    if not has_shapers:
        if tables is None:
            raise SchemaError("model must carry shaper MLPs, baked tables, or both")
        for name in shaper_names:
            expected.pop(name)

    if tables is not None:
        if tables.n_channels != config.n_newt_channels:
            raise SchemaError("table bank channel count does not match config")
        for name in table_names:
            expected[name] = (tables.table_size,)

    for name, shape in expected.items():
        if name not in tensors:
            raise SchemaError(f"missing required tensor: {name}")
        actual = tuple(tensors[name].shape)
        if actual != shape:
            raise SchemaError(f"tensor {name} has shape {actual}, expected {shape}")
    unknown = present - set(expected)
    if unknown:
        raise SchemaError(f"unknown tensor: {sorted(unknown)[0]}")
    return sorted(expected)


def save_model(
    config: ModelConfig,
    tensors: Mapping[str, np.ndarray],
    stats: NormalizationStats,
    tables: FastNewtTableBank | None = None,
) -> bytes:
    """Serialize a model deterministically; round-trips bit-exactly through load_model."""
    store = {name: np.ascontiguousarray(t, dtype="<f4") for name, t in tensors.items()}
    if tables is not None:
        for i, name in enumerate(table_tensor_names(config)):
            if name in store:
                raise SchemaError(f"tensor {name} clashes with the embedded table bank")
            store[name] = np.ascontiguousarray(tables.values[i], dtype="<f4")
    order = _check_store(config, store, tables)

    meta = {
        "config": asdict(config),
        "stats": {"mean": list(stats.mean), "std": list(stats.std)},
        "tensors": [{"name": name, "shape": list(store[name].shape)} for name in order],
    }
    if tables is not None:
        meta["fastnewt"] = {"lo": tables.lo, "hi": tables.hi}
    blob = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode("utf-8")

    parts = [MAGIC, np.uint32(FORMAT_VERSION).tobytes(), np.uint32(len(blob)).tobytes(), blob]
    parts.extend(store[name].tobytes() for name in order)
    return b"".join(parts)


def load_model(data: bytes) -> LoadedModel:
    """Parse and fully validate a .newt byte stream.

    Rejects malformed containers (FormatError) and models that would fail at
    render time: wrong shapes, non-finite values, a nonzero leading reverb
    sample, or non-positive normalization std (SchemaError).
    """
    if len(data) < 12:
        raise FormatError("file too short for header")
    if data[:4] != MAGIC:
        raise FormatError("bad magic bytes (not a .newt file)")
    version = int(np.frombuffer(data[4:8], dtype="<u4")[0])
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported format version {version}")
    meta_len = int(np.frombuffer(data[8:12], dtype="<u4")[0])
    if len(data) < 12 + meta_len:
        raise FormatError("truncated metadata block")
    try:
        meta = json.loads(data[12 : 12 + meta_len].decode("utf-8"))
        config = ModelConfig(**meta["config"])
        stats = NormalizationStats(
            mean=np.asarray(meta["stats"]["mean"], dtype=np.float64),
            std=np.asarray(meta["stats"]["std"], dtype=np.float64),
        )
        manifest = [(entry["name"], tuple(entry["shape"])) for entry in meta["tensors"]]
    except (KeyError, TypeError, ValueError, UnicodeDecodeError) as exc:
        raise FormatError(f"unreadable metadata block: {exc}") from exc

    names = [name for name, _ in manifest]
    if len(set(names)) != len(names):
        raise SchemaError("duplicate tensor name in manifest")

    tensors: dict[str, np.ndarray] = {}
    offset = 12 + meta_len
    for name, shape in manifest:
        count = math.prod(shape)
        end = offset + 4 * count
        if end > len(data):
            raise FormatError(f"file truncated inside tensor {name}")
        tensors[name] = np.frombuffer(data[offset:end], dtype="<f4").reshape(shape).copy()
        offset = end
    if offset != len(data):
        raise FormatError("trailing bytes after final tensor payload")

    tables = None
    table_names = table_tensor_names(config)
    if any(name in tensors for name in table_names):
        domain = meta.get("fastnewt")
        if domain is None:
            raise SchemaError("baked tables present but no table domain in metadata")
        missing = [name for name in table_names if name not in tensors]
        if missing:
            raise SchemaError(f"missing required tensor: {missing[0]}")
        stacked = np.stack([tensors[name] for name in table_names]).astype(np.float64)
        tables = FastNewtTableBank(stacked, float(domain["lo"]), float(domain["hi"]))

    table_only = {name: t for name, t in tensors.items() if name not in table_names}
    _check_store(config, tensors, tables)

    for name in sorted(tensors):
        if not np.all(np.isfinite(tensors[name])):
            raise SchemaError(f"tensor {name} contains non-finite values")
    ir = tensors["reverb.ir"]
    if ir[0] != 0.0:
        raise SchemaError("reverb.ir first sample must be exactly zero")

    return LoadedModel(config=config, tensors=table_only, stats=stats, tables=tables)


def load_model_file(path) -> LoadedModel:
    with open(path, "rb") as fh:
        return load_model(fh.read())


def save_model_file(path, config, tensors, stats, tables=None) -> None:
    data = save_model(config, tensors, stats, tables)
    with open(path, "wb") as fh:
        fh.write(data)
