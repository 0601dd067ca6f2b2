"""newtsynth: real-time neural waveshaping synthesis engine."""

from .control import ControlTrack, read_control_csv, synthetic_track, write_control_csv
from .dsp import AudioBuffer, FrameSeries, Spectrogram, fft_convolve, hann_window, stft_magnitude, upsample_linear
from .engine import EngineState, Model, RenderOptions, StreamingSession, measure_rtf, render, render_streaming
from .errors import ControlCsvError, FormatError, NewtError, SchemaError
from .init import random_model
from .metrics import MrStftConfig, harmonic_peak_set, log_magnitude_distance, mr_stft_loss, mr_stft_report, spectral_convergence
from .newt import FastNewtTable, FastNewtTableBank, ShaperBank, bake_bank, bake_error_report, bake_fastnewt, table_lookup
from .reverb import ReverbIr, apply_reverb, init_reverb_ir
from .wav import read_wav, write_wav
from .weights import LoadedModel, ModelConfig, NormalizationStats, load_model, load_model_file, parameter_count, save_model, save_model_file

__version__ = "0.1.0"

__all__ = [
    "AudioBuffer",
    "ControlCsvError",
    "ControlTrack",
    "EngineState",
    "FastNewtTable",
    "FastNewtTableBank",
    "FormatError",
    "FrameSeries",
    "LoadedModel",
    "Model",
    "ModelConfig",
    "MrStftConfig",
    "NewtError",
    "NormalizationStats",
    "RenderOptions",
    "ReverbIr",
    "SchemaError",
    "ShaperBank",
    "Spectrogram",
    "StreamingSession",
    "apply_reverb",
    "bake_bank",
    "bake_error_report",
    "bake_fastnewt",
    "fft_convolve",
    "hann_window",
    "harmonic_peak_set",
    "init_reverb_ir",
    "load_model",
    "load_model_file",
    "log_magnitude_distance",
    "measure_rtf",
    "mr_stft_loss",
    "mr_stft_report",
    "parameter_count",
    "random_model",
    "read_control_csv",
    "read_wav",
    "render",
    "render_streaming",
    "save_model",
    "save_model_file",
    "spectral_convergence",
    "stft_magnitude",
    "synthetic_track",
    "table_lookup",
    "upsample_linear",
    "write_control_csv",
    "write_wav",
]
