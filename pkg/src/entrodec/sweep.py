"""Decoding sweeps over a configuration grid, with correlation analysis.

Each (decoder config, seed) cell decodes every evaluation prefix with its
own deterministically derived task seed, so results are independent of
execution order and of which other grid points run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import DecoderSpec, policy_from_spec
from .decode import (
    DecodeRequest,
    GenerationRecord,
    beam_search,
    greedy_decode,
    stochastic_decode,
)
from .ead import DEFAULT_MAX_BACKOFFS, EADConfig, entropy_aware_decode
from .errors import ConfigError, InvalidParameterError, UndefinedCorrelationError
from .metrics import METRIC_COLUMNS, MetricRow, aggregate_records, pearson_correlation
from .profile import StableEntropyProfile
from .vocab import TokenSequence, Vocabulary


def derive_seed(seed: int, index: int) -> int:
    """Stable per-task seed from (sweep seed, request index)."""
    return int(np.random.SeedSequence(entropy=(seed, index)).generate_state(1)[0])


def make_ead_config(spec: DecoderSpec, profile: StableEntropyProfile) -> EADConfig:
    return EADConfig(
        profile=profile,
        sampler=policy_from_spec(spec),
        patience=int(spec.param("n", 5)),
        margin=float(spec.param("alpha", 0.5)),
        ngreedy=int(spec.param("g", 10)),
        max_backoffs=int(spec.param("max_backoffs", DEFAULT_MAX_BACKOFFS)),
        enable_upper=bool(spec.param("eui", True)),
        enable_lower=bool(spec.param("eli", True)),
    )


def run_decoder(
    provider,
    spec: DecoderSpec,
    prefix: TokenSequence,
    max_len: int,
    seed: int,
    profile: StableEntropyProfile | None = None,
) -> GenerationRecord:
    """Dispatch one decode request to the decoder named by `spec`."""
    req = DecodeRequest(provider=provider, prefix=prefix, max_len=max_len, seed=seed)
    if spec.kind == "greedy":
        return greedy_decode(req)
    if spec.kind == "beam":
        return beam_search(req, n=int(spec.param("n", 5)), block_ngram=spec.param("block"))
    if spec.kind in ("top_k", "nucleus", "typical", "temperature"):
        return stochastic_decode(req, policy_from_spec(spec))
    if spec.kind == "ead":
        if profile is None:
            raise ConfigError("entropy-aware decoding needs a profile")
        return entropy_aware_decode(req, make_ead_config(spec, profile))
    raise ConfigError(f"unknown decoder kind {spec.kind!r}")


@dataclass(frozen=True)
class SweepResultRow:
    """One sweep table row: a scored (config, seed) cell or a per-config aggregate."""

    config_id: str
    row_kind: str  # "run" | "aggregate"
    seed: int | None
    metrics: MetricRow

    @property
    def sort_key(self) -> tuple:
        return (self.config_id, self.row_kind, -1 if self.seed is None else self.seed)


@dataclass(frozen=True)
class CorrelationReport:
    n_points: int
    evr_vs_f1: float | None
    elvr_vs_repeat5: float | None
    euvr_vs_f1: float | None


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepResultRow, ...]
    correlations: CorrelationReport


def _mean_rows(config_id: str, rows: Sequence[MetricRow]) -> MetricRow:
    def mean(get) -> float:
        return sum(get(r) for r in rows) / len(rows)

    return MetricRow(
        config_id=config_id,
        f1=mean(lambda r: r.f1),
        repeat_score5=mean(lambda r: r.repeat_score5),
        ngram3_repeats=mean(lambda r: r.ngram3_repeats),
        evr=mean(lambda r: r.evr),
        elvr=mean(lambda r: r.elvr),
        euvr=mean(lambda r: r.euvr),
        det_pct=mean(lambda r: r.det_pct),
        backoffs_mean=mean(lambda r: r.backoffs_mean),
    )


def run_sweep(
    provider,
    profile: StableEntropyProfile,
    pairs: Sequence[tuple[TokenSequence, TokenSequence]],
    specs: Sequence[DecoderSpec],
    seeds: Sequence[int],
    max_len: int,
    zone_width: float = 1.5,
    mode: str = "text-completion",
    vocab: Vocabulary | None = None,
) -> SweepResult:
    """Decode every prefix under every (config, seed), score, and correlate.

    Correlations are computed over the per-config aggregate rows, pairing
    band-violation ratios with the quality metrics.
    """
    if not specs:
        raise ConfigError("sweep needs at least one decoder")
    if not seeds:
        raise ConfigError("sweep needs at least one seed")
    targets = [target for _, target in pairs]
    rows: list[SweepResultRow] = []
    aggregates: list[MetricRow] = []
    for spec in sorted(specs, key=lambda s: s.config_id):
        per_seed: list[MetricRow] = []
        for seed in sorted(seeds):
            records = [
                run_decoder(
                    provider,
                    spec,
                    prefix,
                    max_len,
                    derive_seed(seed, idx),
                    profile=profile,
                )
                for idx, (prefix, _) in enumerate(pairs)
            ]
            metric_row = aggregate_records(
                records,
                targets,
                profile,
                zone_width,
                mode=mode,
                vocab=vocab,
                config_id=spec.config_id,
            )
            per_seed.append(metric_row)
            rows.append(
                SweepResultRow(
                    config_id=spec.config_id, row_kind="run", seed=seed, metrics=metric_row
                )
            )
        agg = _mean_rows(spec.config_id, per_seed)
        aggregates.append(agg)
        rows.append(
            SweepResultRow(config_id=spec.config_id, row_kind="aggregate", seed=None, metrics=agg)
        )
    rows.sort(key=lambda r: r.sort_key)

    def corr(xs, ys) -> float | None:
        # Degenerate grids (too few configs, or zero variance) report no rho.
        try:
            return pearson_correlation(xs, ys)
        except (UndefinedCorrelationError, InvalidParameterError):
            return None

    report = CorrelationReport(
        n_points=len(aggregates),
        evr_vs_f1=corr([a.evr for a in aggregates], [a.f1 for a in aggregates]),
        elvr_vs_repeat5=corr(
            [a.elvr for a in aggregates], [a.repeat_score5 for a in aggregates]
        ),
        euvr_vs_f1=corr([a.euvr for a in aggregates], [a.f1 for a in aggregates]),
    )
    return SweepResult(rows=tuple(rows), correlations=report)


SWEEP_COLUMNS = ("config_id", "row_kind", "seed") + METRIC_COLUMNS[1:]


def sweep_rows_to_csv(rows: Sequence[SweepResultRow]) -> str:
    lines = [",".join(SWEEP_COLUMNS)]
    for row in rows:
        m = row.metrics
        seed = "" if row.seed is None else str(row.seed)
        lines.append(
            f"{row.config_id},{row.row_kind},{seed},{m.f1:.6f},{m.repeat_score5:.6f},"
            f"{m.ngram3_repeats:.6f},{m.evr:.6f},{m.elvr:.6f},{m.euvr:.6f},"
            f"{m.det_pct:.6f},{m.backoffs_mean:.6f}"
        )
    return "\n".join(lines) + "\n"


def correlation_report_to_csv(report: CorrelationReport) -> str:
    """The three studied pairs; F1 stands in as the quality proxy and is labeled so."""

    def fmt(rho: float | None) -> str:
        return "nan" if rho is None or math.isnan(rho) else f"{rho:.6f}"

    lines = [
        "# f1 is a proxy for generation quality (no embedding-based metric at desk scale)",
        "pair,n,rho",
        f"evr_vs_f1_quality_proxy,{report.n_points},{fmt(report.evr_vs_f1)}",
        f"elvr_vs_repeat_score5,{report.n_points},{fmt(report.elvr_vs_repeat5)}",
        f"euvr_vs_f1,{report.n_points},{fmt(report.euvr_vs_f1)}",
    ]
    return "\n".join(lines) + "\n"


def parse_sweep_csv(text: str) -> list[SweepResultRow]:
    lines = [line for line in text.strip().split("\n") if line]
    header = lines[0].split(",")
    if tuple(header) != SWEEP_COLUMNS:
        raise ConfigError("unrecognized sweep csv header")
    rows: list[SweepResultRow] = []
    for line in lines[1:]:
        parts = line.split(",")
        m = MetricRow(
            config_id=parts[0],
            f1=float(parts[3]),
            repeat_score5=float(parts[4]),
            ngram3_repeats=float(parts[5]),
            evr=float(parts[6]),
            elvr=float(parts[7]),
            euvr=float(parts[8]),
            det_pct=float(parts[9]),
            backoffs_mean=float(parts[10]),
        )
        rows.append(
            SweepResultRow(
                config_id=parts[0],
                row_kind=parts[1],
                seed=None if parts[2] == "" else int(parts[2]),
                metrics=m,
            )
        )
    return rows
