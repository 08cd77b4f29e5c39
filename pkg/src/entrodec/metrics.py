"""Generation-quality metrics and per-run aggregation.

All sequence metrics operate on token ids; stop-word and special-token
filtering needs the vocabulary to resolve surface forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .decode import GenerationRecord
from .errors import (
    AlignmentError,
    InvalidParameterError,
    UndefinedCorrelationError,
    ZeroLengthError,
)
from .profile import EntropyTrace, StableEntropyProfile, detect_violations
from .dist import smooth_trace
from .vocab import TokenSequence, Vocabulary

# Version tag for the bundled stop-word inventory; bump when the list changes.
STOPWORDS_VERSION = "v1"

STOPWORDS = frozenset(
    """a about above after again against all am an and any are as at be because been
    before being below between both but by can did do does doing down during each few
    for from further had has have having he her here hers herself him himself his how
    i if in into is it its itself just me more most my myself no nor not now of off
    on once only or other our ours ourselves out over own s same she should so some
    such t than that the their theirs them themselves then there these they this
    those through to too under until up very was we were what when where which while
    who whom why will with you your yours yourself yourselves
    . , ; : ! ?""".split()
)


def _ngram_repeats(ids: Sequence[int], n: int) -> int:
    """Occurrences of n-grams beyond the first occurrence of each distinct n-gram."""
    total = len(ids) - n + 1
    if total <= 0:
        return 0
    distinct = len({tuple(ids[i : i + n]) for i in range(total)})
    return total - distinct


def ngram_repeat_count(tokens: TokenSequence, n: int) -> float:
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    return float(_ngram_repeats(tokens.ids, n))


def repeat_score_at_5(tokens: TokenSequence) -> float:
    """Exponentially weighted repetition across 1- to 5-grams, per token.

    With rep_i the repeated-occurrence count at order i, the score is
    log2(sum(2^i * rep_i) / sum(rep_i)) * rep_1 / len(tokens), and exactly
    0 when the sequence has no repeats at any order (log2(0) guard).
    """
    if len(tokens) == 0:
        raise ZeroLengthError("cannot score an empty sequence")
    reps = [_ngram_repeats(tokens.ids, i) for i in range(1, 6)]
    cumulative = sum(reps)
    if cumulative == 0:
        return 0.0
    weighted = sum((2**i) * r for i, r in enumerate(reps, start=1))
    return math.log2(weighted / cumulative) * reps[0] / len(tokens)


def f1_overlap(
    generated: TokenSequence,
    target: TokenSequence,
    filter_stopwords: bool = False,
    vocab: Vocabulary | None = None,
) -> float:
    """Unigram-set F1 between generation and target (duplicates collapsed).

    Special tokens never count toward overlap when a vocabulary is given.
    filter_stopwords removes the bundled stop-word list first (the text-
    completion convention); dialog scoring passes False.
    """
    if len(target) == 0:
        raise InvalidParameterError("target must be non-empty")
    if filter_stopwords and vocab is None:
        raise InvalidParameterError("stop-word filtering needs the vocabulary")

    def type_set(seq: TokenSequence) -> set[int]:
        items = set(seq.ids)
        if vocab is not None:
            items -= vocab.special_ids
            if filter_stopwords:
                items = {i for i in items if vocab.token_of(i) not in STOPWORDS}
        return items

    gen = type_set(generated)
    tgt = type_set(target)
    if not gen or not tgt:
        return 0.0
    hits = len(gen & tgt)
    if hits == 0:
        return 0.0
    precision = hits / len(gen)
    recall = hits / len(tgt)
    return 2 * precision * recall / (precision + recall)


def pearson_correlation(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson correlation, clamped into [-1, 1]."""
    if len(xs) != len(ys):
        raise InvalidParameterError("inputs must have equal length")
    if len(xs) < 3:
        raise InvalidParameterError("need at least 3 points")
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    dx = [x - mx for x in xs]
    dy = [y - my for y in ys]
    vx = sum(d * d for d in dx)
    vy = sum(d * d for d in dy)
    if vx == 0.0 or vy == 0.0:
        raise UndefinedCorrelationError("zero variance input")
    rho = sum(a * b for a, b in zip(dx, dy)) / math.sqrt(vx * vy)
    return min(max(rho, -1.0), 1.0)


@dataclass(frozen=True)
class MetricRow:
    """One scored decoding configuration (macro-averaged over records)."""

    config_id: str
    f1: float
    repeat_score5: float
    ngram3_repeats: float
    evr: float
    elvr: float
    euvr: float
    det_pct: float
    backoffs_mean: float


METRIC_COLUMNS = (
    "config_id",
    "f1",
    "repeat_score5",
    "ngram3_repeats",
    "evr",
    "elvr",
    "euvr",
    "det_pct",
    "backoffs_mean",
)

MODES = ("text-completion", "dialog")


def _reported_det_pct(record: GenerationRecord) -> float:
    """The reporting convention: deterministic decoders 100, pure samplers 0,
    intervention-aware percentage for entropy-aware decoding."""
    if record.decoder in ("greedy", "beam"):
        return 100.0
    if record.decoder == "sample":
        return 0.0
    return 100.0 * record.det_fraction


def aggregate_records(
    records: Sequence[GenerationRecord],
    targets: Sequence[TokenSequence],
    profile: StableEntropyProfile,
    width: float,
    mode: str = "text-completion",
    vocab: Vocabulary | None = None,
    config_id: str = "",
) -> MetricRow:
    """Score each (record, target) pair and macro-average into one row.

    Band violations are computed on the smoothed entropy trace using the
    profile's own smoothing window. Records with no tokens contribute
    zeros (an immediate-EOS generation is degenerate but not an error).
    """
    if len(records) != len(targets):
        raise AlignmentError(
            f"{len(records)} records vs {len(targets)} targets"
        )
    if mode not in MODES:
        raise InvalidParameterError(f"mode must be one of {MODES}, got {mode!r}")
    if not records:
        raise InvalidParameterError("need at least one record")
    filter_stops = mode == "text-completion"
    f1s, rep5s, rep3s, evrs, elvrs, euvrs, dets, backs = ([] for _ in range(8))
    for record, target in zip(records, targets):
        if len(record.tokens) == 0:
            f1s.append(0.0)
            rep5s.append(0.0)
            rep3s.append(0.0)
            evrs.append(0.0)
            elvrs.append(0.0)
            euvrs.append(0.0)
        else:
            f1s.append(f1_overlap(record.tokens, target, filter_stops, vocab))
            rep5s.append(repeat_score_at_5(record.tokens))
            rep3s.append(ngram_repeat_count(record.tokens, 3))
            trace = EntropyTrace(
                raw=record.entropies,
                smoothed=smooth_trace(record.entropies, profile.window),
                window=profile.window,
            )
            stats = detect_violations(trace, profile, width)
            evrs.append(stats.evr)
            elvrs.append(stats.elvr)
            euvrs.append(stats.euvr)
        dets.append(_reported_det_pct(record))
        backs.append(float(record.backoff_count))

    def mean(vals: list[float]) -> float:
        return sum(vals) / len(vals)

    return MetricRow(
        config_id=config_id,
        f1=mean(f1s),
        repeat_score5=mean(rep5s),
        ngram3_repeats=mean(rep3s),
        evr=mean(evrs),
        elvr=mean(elvrs),
        euvr=mean(euvrs),
        det_pct=mean(dets),
        backoffs_mean=mean(backs),
    )


def metric_rows_to_csv(rows: Sequence[MetricRow]) -> str:
    """Fixed column order, 6 decimal places."""
    lines = [",".join(METRIC_COLUMNS)]
    for r in rows:
        lines.append(
            f"{r.config_id},{r.f1:.6f},{r.repeat_score5:.6f},{r.ngram3_repeats:.6f},"
            f"{r.evr:.6f},{r.elvr:.6f},{r.euvr:.6f},{r.det_pct:.6f},{r.backoffs_mean:.6f}"
        )
    return "\n".join(lines) + "\n"
