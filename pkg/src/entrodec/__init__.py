"""Text-generation engine with entropy-calibrated decoding and analysis.

The package trains word n-gram language models (or talks to external model
servers over a line protocol), estimates the per-timestep entropy baseline
of a model under held-out text, and decodes with classical strategies or
entropy-aware interventions, scoring everything for degeneration.
"""

from .vocab import (
    Vocabulary,
    TokenSequence,
    build_vocabulary,
    encode_text,
    decode_tokens,
)
from .dist import ConditionalDistribution, entropy_nats, surprisal_nats, smooth_trace
from .ngram import NGramModel, train_ngram
from .provider import ModelProvider, RemoteProvider, connect_remote_provider
from .profile import (
    EntropyTrace,
    StableEntropyProfile,
    ZoneBounds,
    ViolationStats,
    LineFit,
    trace_under_targets,
    estimate_profile,
    zone_bounds,
    fit_line,
    detect_violations,
    save_profile,
    load_profile,
)
from .truncation import (
    TruncationPolicy,
    apply_temperature,
    truncate_top_k,
    truncate_nucleus,
    truncate_typical,
    sample_from,
)
from .decode import (
    DecodeRequest,
    GenerationRecord,
    greedy_decode,
    beam_search,
    stochastic_decode,
)
from .ead import EADConfig, entropy_aware_decode
from .metrics import (
    MetricRow,
    f1_overlap,
    repeat_score_at_5,
    ngram_repeat_count,
    pearson_correlation,
    aggregate_records,
)

__version__ = "0.1.0"

__all__ = [
    "Vocabulary",
    "TokenSequence",
    "build_vocabulary",
    "encode_text",
    "decode_tokens",
    "ConditionalDistribution",
    "entropy_nats",
    "surprisal_nats",
    "smooth_trace",
    "NGramModel",
    "train_ngram",
    "ModelProvider",
    "RemoteProvider",
    "connect_remote_provider",
    "EntropyTrace",
    "StableEntropyProfile",
    "ZoneBounds",
    "ViolationStats",
    "LineFit",
    "trace_under_targets",
    "estimate_profile",
    "zone_bounds",
    "fit_line",
    "detect_violations",
    "save_profile",
    "load_profile",
    "TruncationPolicy",
    "apply_temperature",
    "truncate_top_k",
    "truncate_nucleus",
    "truncate_typical",
    "sample_from",
    "DecodeRequest",
    "GenerationRecord",
    "greedy_decode",
    "beam_search",
    "stochastic_decode",
    "EADConfig",
    "entropy_aware_decode",
    "MetricRow",
    "f1_overlap",
    "repeat_score_at_5",
    "ngram_repeat_count",
    "pearson_correlation",
    "aggregate_records",
]
