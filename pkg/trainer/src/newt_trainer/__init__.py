"""newt-trainer: desk-scale training pipeline for .newt waveshaping models."""

from .config import DESK_SHAPE, DatasetSpec, ModelShape, TrainConfig
from .data import PreparedDataset, Segment, load_audio, preprocess, write_control_csv
from .export import export_model
from .features import a_weighted_loudness, estimate_f0_autocorr, harmonic_tone
from .loss import MrStftLoss
from .model import WaveshaperModel, export_tensors
from .reference import ReferenceSynth
from .serialize import newt_bytes, read_fixture_bundle, write_fixture_bundle, write_newt
from .train import TrainResult, train

__all__ = [
    "DESK_SHAPE",
    "DatasetSpec",
    "ModelShape",
    "MrStftLoss",
    "PreparedDataset",
    "ReferenceSynth",
    "Segment",
    "TrainConfig",
    "TrainResult",
    "WaveshaperModel",
    "a_weighted_loudness",
    "estimate_f0_autocorr",
    "export_model",
    "export_tensors",
    "harmonic_tone",
    "load_audio",
    "newt_bytes",
    "preprocess",
    "read_fixture_bundle",
    "train",
    "write_control_csv",
    "write_fixture_bundle",
    "write_newt",
]
