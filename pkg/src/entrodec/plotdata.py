"""Tidy plot-data tables for the figure families (no rendering here).

Four file shapes:
* zone overlay for one trace: t, entropy, smoothed, mu, lower, upper
* decoder comparison: decoder, t, entropy, smoothed, mu, lower, upper
* sweep scatter: one row per decoder config with metric pairs
* smoothed surprisal traces: decoder, t, surprisal_smoothed, mu
"""

from __future__ import annotations

import os
from typing import Sequence

from .decode import GenerationRecord
from .dist import smooth_trace
from .errors import InvalidParameterError
from .profile import StableEntropyProfile, zone_bounds
from .sweep import SweepResultRow


def _zone_row(profile: StableEntropyProfile, width: float, t: int) -> tuple[float, float, float]:
    lower, upper = zone_bounds(profile, width, t)
    mu = float(profile.mu[min(t, profile.horizon)])
    return mu, lower, upper


def decode_table(
    record: GenerationRecord, profile: StableEntropyProfile, width: float
) -> str:
    """Per-step table for one generation: band position and step flags."""
    lines = ["t,entropy,smoothed,lower,upper,greedy,below,above"]
    smoothed = smooth_trace(record.entropies, profile.window)
    for t, (raw, sm) in enumerate(zip(record.entropies, smoothed)):
        lower, upper = zone_bounds(profile, width, t)
        lines.append(
            f"{t},{raw:.9f},{sm:.9f},{lower:.9f},{upper:.9f},"
            f"{int(record.greedy_flags[t])},{int(sm < lower)},{int(sm > upper)}"
        )
    return "\n".join(lines) + "\n"


def zone_overlay_table(
    raw_trace: Sequence[float],
    profile: StableEntropyProfile,
    width: float,
) -> str:
    """Single-trace overlay: t, entropy, smoothed, mu, lower, upper."""
    lines = ["t,entropy,smoothed,mu,lower,upper"]
    smoothed = smooth_trace(raw_trace, profile.window)
    for t, (raw, sm) in enumerate(zip(raw_trace, smoothed)):
        mu, lower, upper = _zone_row(profile, width, t)
        lines.append(f"{t},{raw:.9f},{sm:.9f},{mu:.9f},{lower:.9f},{upper:.9f}")
    return "\n".join(lines) + "\n"


def decoder_overlay_table(
    records: dict[str, GenerationRecord],
    profile: StableEntropyProfile,
    width: float,
) -> str:
    """Multi-decoder overlay keyed by a decoder label column."""
    lines = ["decoder,t,entropy,smoothed,mu,lower,upper"]
    for label in sorted(records):
        record = records[label]
        smoothed = smooth_trace(record.entropies, profile.window)
        for t, (raw, sm) in enumerate(zip(record.entropies, smoothed)):
            mu, lower, upper = _zone_row(profile, width, t)
            lines.append(
                f"{label},{t},{raw:.9f},{sm:.9f},{mu:.9f},{lower:.9f},{upper:.9f}"
            )
    return "\n".join(lines) + "\n"


def surprisal_overlay_table(
    records: dict[str, GenerationRecord],
    profile: StableEntropyProfile,
) -> str:
    """Smoothed surprisal per decoder with the entropy baseline as reference rate."""
    lines = ["decoder,t,surprisal_smoothed,mu"]
    for label in sorted(records):
        record = records[label]
        smoothed = smooth_trace(record.surprisals, profile.window)
        for t, sm in enumerate(smoothed):
            mu = float(profile.mu[min(t, profile.horizon)])
            lines.append(f"{label},{t},{sm:.9f},{mu:.9f}")
    return "\n".join(lines) + "\n"


def sweep_scatter_table(rows: Sequence[SweepResultRow]) -> str:
    """One row per decoder config (aggregates only) with the paired metrics."""
    lines = ["config_id,evr,elvr,euvr,f1,repeat_score5,det_pct"]
    for row in sorted(rows, key=lambda r: r.config_id):
        if row.row_kind != "aggregate":
            continue
        m = row.metrics
        lines.append(
            f"{row.config_id},{m.evr:.6f},{m.elvr:.6f},{m.euvr:.6f},"
            f"{m.f1:.6f},{m.repeat_score5:.6f},{m.det_pct:.6f}"
        )
    return "\n".join(lines) + "\n"


def emit_plot_data(
    out_dir: str,
    profile: StableEntropyProfile,
    width: float,
    records_by_label: dict[str, GenerationRecord] | None = None,
    sweep_rows: Sequence[SweepResultRow] | None = None,
) -> list[str]:
    """Write whichever plot-data files the available inputs support."""
    if records_by_label is None and sweep_rows is None:
        raise InvalidParameterError("nothing to emit: need records and/or sweep rows")
    os.makedirs(out_dir, exist_ok=True)
    written: list[str] = []

    def write(name: str, content: str) -> None:
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(content)
        written.append(path)

    if records_by_label:
        first_label = sorted(records_by_label)[0]
        write(
            "zone_single.csv",
            zone_overlay_table(records_by_label[first_label].entropies, profile, width),
        )
        write("zone_decoders.csv", decoder_overlay_table(records_by_label, profile, width))
        write("surprisal_decoders.csv", surprisal_overlay_table(records_by_label, profile))
    if sweep_rows:
        write("sweep_scatter.csv", sweep_scatter_table(sweep_rows))
    return written
