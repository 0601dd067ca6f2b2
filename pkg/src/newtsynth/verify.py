"""Model verification: structural and behavioral invariant checks.

Used by the `verify` CLI command. Each check yields a named result so a
failure points at the module and invariant that broke.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .control import synthetic_track
from .engine import Model, RenderOptions, render, render_streaming
from .errors import NewtError
from .newt import bake_error_report
from .weights import load_model_file

BAKE_RELATIVE_TOLERANCE = 1e-2


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str = ""


def run_verification(path) -> list[CheckResult]:
    results: list[CheckResult] = []
    try:
        loaded = load_model_file(path)
    except (NewtError, OSError) as exc:
        results.append(CheckResult("weights-io/load", False, str(exc)))
        return results
    results.append(CheckResult("weights-io/load", True, f"{len(loaded.tensors)} tensors"))

    model = Model(loaded)

    if model.has_shapers and model.has_tables:
        report = bake_error_report(model.shapers, model.tables)
        worst = max(report, key=lambda r: r["relative_error"])
        ok = np.isfinite(worst["relative_error"]) and worst["relative_error"] < BAKE_RELATIVE_TOLERANCE
        results.append(
            CheckResult(
                "newt/table-fidelity",
                ok,
                f"worst channel {worst['channel']}: relative error {worst['relative_error']:.3e}",
            )
        )

    hop = model.config.hop_size
    track = synthetic_track(32, hop, model.config.sample_rate)
    opts = RenderOptions(use_fastnewt=not model.has_shapers)
    try:
        reference = render(model, track, opts)
        finite = bool(np.all(np.isfinite(reference.samples)))
        results.append(
            CheckResult("engine/finite-render", finite, f"{len(reference)} samples rendered")
        )
    except (NewtError, ValueError, ArithmeticError) as exc:
        results.append(CheckResult("engine/finite-render", False, str(exc)))
        return results

    streaming_ok = True
    detail = ""
    for block in (2 * hop, 8 * hop):
        streamed = render_streaming(
            model,
            track,
            RenderOptions(use_fastnewt=opts.use_fastnewt, block_size=block),
        )
        diff = float(np.max(np.abs(streamed.samples - reference.samples)))
        if diff != 0.0:
            streaming_ok = False
            detail = f"block {block}: max abs diff {diff:.3e}"
            break
    results.append(
        CheckResult("engine/streaming-equivalence", streaming_ok, detail or "blocks match one-shot")
    )
    return results
