"""Entropy-aware decoding: greedy generation with band-triggered interventions.

The decoder acts greedily except in two situations, judged against a
calibration profile using the instantaneous entropy of the current
conditional distribution:

* the entropy rises above mu[t] + margin * sigma[t]: the argmax choice is
  replaced by one draw from the configured fallback sampler (an
  upper-bound intervention, counted in eui_count);
* the entropy stays below mu[t] - margin * sigma[t] for more than
  `patience` consecutive steps: generation rewinds to the first step of
  the violating run, discards everything after it, and takes the highest-
  ranked token not yet tried at that position (a backoff, counted in
  backoff_count).

Per-position tried-token sets make repeated rewinds at one index walk down
the ranking. Sampler draws made before a rewind point are kept as-is; the
RNG stream simply continues. A finite backoff budget guarantees
termination: once exhausted, low-entropy runs are accepted and decoding
continues (flagged on the record).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .decode import DecodeRequest, GenerationRecord, argmax_token, _eos_id
from .dist import entropy_nats
from .errors import InvalidParameterError, ProfileMismatchError
from .profile import StableEntropyProfile
from .truncation import TruncationPolicy, apply_policy, sample_from
from .vocab import TokenSequence

DEFAULT_MAX_BACKOFFS = 50


@dataclass(frozen=True)
class EADConfig:
    """Hyperparameters for entropy-aware decoding.

    margin is a sigma multiplier for the intervention band (distinct from
    any analysis band width); ngreedy steps at the start are always greedy
    and are never rewound past. enable_upper/enable_lower switch the two
    interventions independently for ablations.
    """

    profile: StableEntropyProfile
    sampler: TruncationPolicy = TruncationPolicy(kind="typical", tau=0.2)
    patience: int = 5
    margin: float = 0.5
    ngreedy: int = 10
    max_backoffs: int = DEFAULT_MAX_BACKOFFS
    enable_upper: bool = True
    enable_lower: bool = True

    def __post_init__(self) -> None:
        if self.patience < 1:
            raise InvalidParameterError(f"patience must be >= 1, got {self.patience}")
        if self.margin <= 0:
            raise InvalidParameterError(f"margin must be > 0, got {self.margin}")
        if self.ngreedy < 0:
            raise InvalidParameterError(f"ngreedy must be >= 0, got {self.ngreedy}")
        if self.max_backoffs < 1:
            raise InvalidParameterError(f"max_backoffs must be >= 1, got {self.max_backoffs}")


def _intervention_bounds(
    profile: StableEntropyProfile, margin: float, t: int
) -> tuple[float, float]:
    if math.isinf(margin):
        return (-math.inf, math.inf)
    tt = min(t, profile.horizon)
    mu = float(profile.mu[tt])
    half = margin * float(profile.sigma[tt])
    return (mu - half, mu + half)


def _next_ranked_untried(dist, tried: set[int]) -> int | None:
    """Highest-probability token not in `tried` (ties by lower id), or None."""
    order = np.lexsort((np.arange(dist.vocab_size), -dist.logprobs))
    for tok in order:
        if int(tok) not in tried:
            return int(tok)
    return None


def entropy_aware_decode(req: DecodeRequest, cfg: EADConfig) -> GenerationRecord:
    """Decode `req` under entropy-aware intervention rules.

    A profile built for a different model (mismatched hash) is rejected;
    profiles with an empty hash are accepted as-is.
    """
    provider_hash = getattr(req.provider, "model_hash", "")
    if cfg.profile.model_hash and provider_hash and cfg.profile.model_hash != provider_hash:
        raise ProfileMismatchError(
            f"profile built for model {cfg.profile.model_hash}, provider is {provider_hash}"
        )
    eos = _eos_id(req.provider)
    rng = np.random.default_rng(req.seed)
    prefix = tuple(req.prefix.ids)

    tokens: list[int] = []
    entropies: list[float] = []
    surprisals: list[float] = []
    greedy_flags: list[bool] = []
    tried: dict[int, set[int]] = {}
    consecutive_low = 0
    eui_count = 0
    backoff_count = 0
    budget_exhausted = False
    stopped = False

    while len(tokens) < req.max_len and not stopped:
        t = len(tokens)
        dist = req.provider.next_distribution(prefix + tuple(tokens))
        w = argmax_token(dist)
        intervened = False

        if t >= cfg.ngreedy:
            h = entropy_nats(dist)
            lower, upper = _intervention_bounds(cfg.profile, cfg.margin, t)
            if cfg.enable_upper and h > upper:
                w = sample_from(apply_policy(dist, cfg.sampler), rng)
                eui_count += 1
                intervened = True
            if cfg.enable_lower and h < lower:
                consecutive_low += 1
            else:
                consecutive_low = 0
            if consecutive_low > cfg.patience:
                if backoff_count < cfg.max_backoffs:
                    rewind_to = max(t - cfg.patience, cfg.ngreedy)
                    rewind_dist = req.provider.next_distribution(
                        prefix + tuple(tokens[:rewind_to])
                    )
                    replacement = _next_ranked_untried(
                        rewind_dist, tried.get(rewind_to, set())
                    )
                    if replacement is not None:
                        del tokens[rewind_to:]
                        del entropies[rewind_to:]
                        del surprisals[rewind_to:]
                        del greedy_flags[rewind_to:]
                        for pos in [p for p in tried if p > rewind_to]:
                            del tried[pos]
                        backoff_count += 1
                        consecutive_low = 0
                        if req.stop_at_eos and replacement == eos:
                            stopped = True
                            break
                        tokens.append(replacement)
                        entropies.append(entropy_nats(rewind_dist))
                        surprisals.append(float(-rewind_dist.logprobs[replacement]))
                        greedy_flags.append(False)
                        tried.setdefault(rewind_to, set()).add(replacement)
                        continue
                    consecutive_low = 0
                else:
                    budget_exhausted = True
                    consecutive_low = 0

        if req.stop_at_eos and w == eos:
            break
        tokens.append(w)
        entropies.append(entropy_nats(dist))
        surprisals.append(float(-dist.logprobs[w]))
        greedy_flags.append(not intervened)
        tried.setdefault(t, set()).add(w)

    return GenerationRecord(
        tokens=TokenSequence(ids=tuple(tokens), origin="generated"),
        entropies=entropies,
        surprisals=surprisals,
        greedy_flags=greedy_flags,
        seed=req.seed,
        decoder="ead",
        eui_count=eui_count,
        backoff_count=backoff_count,
        flags=("backoff-budget-exhausted",) if budget_exhausted else (),
    )
