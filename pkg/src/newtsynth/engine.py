"""Full synthesis graph: control encoding, exciter, waveshaping, noise, reverb.

The engine is fully causal. One code path serves both offline and streaming
rendering: a one-shot render is a stream fed a single block. All frame-rate
networks run one frame at a time, all audio-rate stages run in fixed
hop-sized chunks, and every ramp and overlap tail is carried in EngineState,
so output never depends on how the control track was blocked.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .control import ControlEncoder, ControlTrack, GruState, standardize, synthetic_track
from .dsp import AudioBuffer, ramp_segments
from .errors import SchemaError
from .exciter import HarmonicExciter, OscillatorState
from .mlp import ControlMlp, MlpLayer
from .newt import FastNewtTableBank, ShaperBank, newt_apply
from .noise import NoiseFilterMlp, NoiseRenderer, NoiseState
from .reverb import ReverbConvolver, ReverbIr, ReverbState
from .weights import LoadedModel, load_model_file


@dataclass
class RenderOptions:
    use_fastnewt: bool = False
    noise_seed: int = 0
    enable_reverb: bool = True
    block_size: int = 4096  # streaming only; must be a positive multiple of hop_size

    def validate(self, hop_size: int) -> None:
        if self.block_size < hop_size or self.block_size % hop_size != 0:
            raise ValueError("block_size must be a positive multiple of hop_size")


def _build_mlp(tensors: dict, prefix: str, depth: int, output_map=None) -> ControlMlp:
    hidden = [
        MlpLayer(
            weight=tensors[f"{prefix}.layer{j}.weight"].astype(np.float64),
            bias=tensors[f"{prefix}.layer{j}.bias"].astype(np.float64),
            ln_gain=tensors[f"{prefix}.layer{j}.ln_gain"].astype(np.float64),
            ln_bias=tensors[f"{prefix}.layer{j}.ln_bias"].astype(np.float64),
        )
        for j in range(depth - 1)
    ]
    return ControlMlp(
        hidden,
        tensors[f"{prefix}.out.weight"].astype(np.float64),
        tensors[f"{prefix}.out.bias"].astype(np.float64),
        output_map=output_map,
    )


class Model:
    """An immutable, loaded synthesizer; shareable across render streams."""

    def __init__(self, loaded: LoadedModel):
        config = loaded.config
        tensors = loaded.tensors
        self.config = config
        self.stats = loaded.stats
        self.encoder = ControlEncoder(
            tensors["control_gru.w_ih"],
            tensors["control_gru.w_hh"],
            tensors["control_gru.b_ih"],
            tensors["control_gru.b_hh"],
            tensors["control_dense.weight"],
            tensors["control_dense.bias"],
        )
        self.affine_mlp = _build_mlp(tensors, "affine_mlp", config.mlp_depth)
        self.noise_mlp = NoiseFilterMlp(_build_mlp(tensors, "noise_mlp", config.mlp_depth))
        self.exciter = HarmonicExciter(
            tensors["exciter.mixer.weight"],
            tensors["exciter.mixer.bias"],
            config.sample_rate,
            chunk_size=config.hop_size,
        )
        if "newt.shaper.0.layer0.weight" in tensors:
            per_channel = [
                [
                    (
                        tensors[f"newt.shaper.{i}.layer{j}.weight"],
                        tensors[f"newt.shaper.{i}.layer{j}.bias"],
                    )
                    for j in range(config.shaper_depth)
                ]
                for i in range(config.n_newt_channels)
            ]
            self.shapers: ShaperBank | None = ShaperBank.from_layers(per_channel)
        else:
            self.shapers = None
        self.tables: FastNewtTableBank | None = loaded.tables
        self.reverb_ir = ReverbIr(tensors["reverb.ir"].astype(np.float64))
        self.reverb = ReverbConvolver(self.reverb_ir, partition=config.hop_size)
        self.noise_renderer = NoiseRenderer(config.hop_size, config.noise_fir_taps)

    @classmethod
    def from_file(cls, path) -> "Model":
        return cls(load_model_file(path))

    @property
    def has_shapers(self) -> bool:
        return self.shapers is not None

    @property
    def has_tables(self) -> bool:
        return self.tables is not None

    def make_state(self, noise_seed: int = 0) -> "EngineState":
        return EngineState(
            gru=self.encoder.initial_state(),
            osc=self.exciter.initial_state(),
            noise=self.noise_renderer.initial_state(noise_seed),
            reverb_tail=self.reverb.initial_state(),
        )


@dataclass
class EngineState:
    """All mutable state of one render stream; owned by exactly one stream."""

    gru: GruState
    osc: OscillatorState
    noise: NoiseState
    reverb_tail: ReverbState
    prev_f0: float | None = None
    prev_params: np.ndarray | None = None
    frames_consumed: int = 0


def _process_block(model: Model, track: ControlTrack, opts: RenderOptions, state: EngineState) -> np.ndarray:
    config = model.config
    hop = config.hop_size
    if np.any(track.f0 <= 0):
        raise ValueError("f0 must be positive on every rendered frame")

    frames = standardize(track, model.stats, config.sample_rate)
    z, state.gru = model.encoder.encode(frames, state.gru)
    params = model.affine_mlp.forward(z)  # (F, 4C)
    mags = model.noise_mlp.forward(z)  # (F, bins)

    # Frame-rate signals reach audio rate through a one-frame look-back ramp:
    # the samples under frame k interpolate from frame k-1 toward frame k, so
    # no output sample ever depends on a frame that has not arrived yet. The
    # previous frame's values are carried in the state; at stream start the
    # first frame is held constant.
    f0_col = track.f0[:, None]
    prev_f0 = f0_col[:1] if state.prev_f0 is None else np.array([[state.prev_f0]])
    f0_audio = ramp_segments(np.concatenate([prev_f0, f0_col[:-1]]), f0_col, hop)[0]
    prev_params = params[:1] if state.prev_params is None else state.prev_params[None, :]
    params_audio = ramp_segments(np.concatenate([prev_params, params[:-1]]), params, hop)
    state.prev_f0 = float(track.f0[-1])
    state.prev_params = params[-1]

    if opts.use_fastnewt:
        if model.tables is None:
            raise SchemaError("model has no baked tables; run bake first")
        shapers = model.tables
    else:
        if model.shapers is None:
            raise SchemaError("model has no shaper MLPs (baked tables only)")
        shapers = model.shapers

    noise_out, state.noise = model.noise_renderer.render(mags, state.noise)

    c = config.n_newt_channels
    num_frames = track.num_frames
    out = np.empty(num_frames * hop)
    for j in range(num_frames):
        sl = slice(j * hop, (j + 1) * hop)
        exc, state.osc = model.exciter.render(f0_audio[sl], state.osc)
        shaped = newt_apply(
            exc,
            params_audio[0:c, sl],
            params_audio[c : 2 * c, sl],
            params_audio[2 * c : 3 * c, sl],
            params_audio[3 * c :, sl],
            shapers,
        )
        out[sl] = shaped.sum(axis=0) + noise_out[sl]

    if opts.enable_reverb:
        out, state.reverb_tail = model.reverb.process(out, state.reverb_tail)
    state.frames_consumed += num_frames
    if not np.all(np.isfinite(out)):
        raise ArithmeticError("render produced non-finite samples")
    return out


class StreamingSession:
    """Stateful block-by-block renderer for one stream."""

    def __init__(self, model: Model, opts: RenderOptions):
        opts.validate(model.config.hop_size)
        self.model = model
        self.opts = opts
        self.state = model.make_state(opts.noise_seed)

    @property
    def frames_per_block(self) -> int:
        return self.opts.block_size // self.model.config.hop_size

    def process(self, chunk: ControlTrack) -> np.ndarray:
        """Render one chunk of whole control frames to audio samples."""
        if chunk.num_frames == 0:
            raise ValueError("stream chunk must contain at least one frame")
        if chunk.hop_size != self.model.config.hop_size:
            raise ValueError("chunk hop size does not match the model")
        return _process_block(self.model, chunk, self.opts, self.state)

    def reset(self) -> None:
        self.state = self.model.make_state(self.opts.noise_seed)


def render(model: Model, track: ControlTrack, opts: RenderOptions | None = None) -> AudioBuffer:
    """Offline render: the whole track as a single stream block."""
    opts = opts or RenderOptions()
    if track.num_frames == 0:
        raise ValueError("control track is empty")
    if track.hop_size != model.config.hop_size:
        raise ValueError(
            f"track hop size {track.hop_size} does not match model hop {model.config.hop_size}"
        )
    state = model.make_state(opts.noise_seed)
    samples = _process_block(model, track, opts, state)
    return AudioBuffer(samples=samples, sample_rate=model.config.sample_rate)


def render_streaming(
    model: Model, track: ControlTrack, opts: RenderOptions | None = None
) -> AudioBuffer:
    """Blockwise render of a full track; sample-identical to render()."""
    opts = opts or RenderOptions()
    if track.num_frames == 0:
        raise ValueError("control track is empty")
    session = StreamingSession(model, opts)
    step = session.frames_per_block
    blocks = [
        session.process(track.slice(start, min(start + step, track.num_frames)))
        for start in range(0, track.num_frames, step)
    ]
    return AudioBuffer(samples=np.concatenate(blocks), sample_rate=model.config.sample_rate)


def measure_rtf(
    model: Model,
    duration: float = 4.0,
    opts: RenderOptions | None = None,
    repetitions: int = 100,
    warmup: int = 0,
    streaming: bool = False,
) -> dict:
    """Wall-clock real-time factor statistics over repeated renders.

    RTF is processing time divided by rendered audio duration; the mean and
    90th percentile over `repetitions` runs are reported. With `streaming`
    the run renders block by block at opts.block_size, modelling a live
    buffer-driven host.
    """
    if duration <= 0 or repetitions < 1:
        raise ValueError("duration must be positive and repetitions >= 1")
    opts = opts or RenderOptions()
    config = model.config
    num_frames = max(1, round(duration * config.sample_rate / config.hop_size))
    track = synthetic_track(num_frames, config.hop_size, config.sample_rate)
    audio_seconds = num_frames * config.hop_size / config.sample_rate
    run = render_streaming if streaming else render
    for _ in range(warmup):
        run(model, track, opts)
    rtfs = []
    for _ in range(repetitions):
        t0 = time.perf_counter()
        run(model, track, opts)
        rtfs.append((time.perf_counter() - t0) / audio_seconds)
    rtfs = np.asarray(rtfs)
    return {
        "runs": repetitions,
        "audio_seconds": audio_seconds,
        "mean_rtf": float(rtfs.mean()),
        "p90_rtf": float(np.percentile(rtfs, 90)),
        "min_rtf": float(rtfs.min()),
        "max_rtf": float(rtfs.max()),
    }
