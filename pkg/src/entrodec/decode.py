"""Generation loops: greedy, beam search with n-gram blocking, and sampling.

Every decoder returns a GenerationRecord carrying the generated ids plus
per-step entropy/surprisal traces of the model's conditional distribution
along the chosen path, and bookkeeping about how deterministic the run was.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dist import ConditionalDistribution, entropy_nats
from .errors import InvalidParameterError
from .truncation import TruncationPolicy, apply_policy, sample_from
from .vocab import TokenSequence


@dataclass(frozen=True)
class DecodeRequest:
    """One generation task: a provider, a prompt, and stopping parameters."""

    provider: object
    prefix: TokenSequence
    max_len: int
    seed: int = 0
    stop_at_eos: bool = True

    def __post_init__(self) -> None:
        if self.max_len < 1:
            raise InvalidParameterError(f"max_len must be >= 1, got {self.max_len}")


@dataclass
class GenerationRecord:
    """A decoded completion plus its traces and determinism accounting.

    greedy_flags[t] is True when step t emitted the plain argmax token with
    no intervention; det_fraction is their mean (1.0 for an empty record).
    eui_count/backoff_count tally interventions as they happened during
    decoding, including any later rewound away.
    """

    tokens: TokenSequence
    entropies: list[float]
    surprisals: list[float]
    greedy_flags: list[bool]
    seed: int
    decoder: str
    eui_count: int = 0
    backoff_count: int = 0
    flags: tuple[str, ...] = ()
    det_fraction: float = field(init=False)

    def __post_init__(self) -> None:
        n = len(self.tokens)
        if not (len(self.entropies) == len(self.surprisals) == len(self.greedy_flags) == n):
            raise InvalidParameterError("per-step traces must match token count")
        self.det_fraction = (
            sum(self.greedy_flags) / n if n else 1.0
        )


def argmax_token(dist: ConditionalDistribution) -> int:
    """Highest-probability token, ties broken by lower id."""
    return int(np.argmax(dist.logprobs))


def _eos_id(provider) -> int:
    _, specials = provider.vocab_info()
    return specials["eos"]


def greedy_decode(req: DecodeRequest) -> GenerationRecord:
    """Argmax walk; stops at EOS (not recorded) or max_len."""
    eos = _eos_id(req.provider)
    ctx = list(req.prefix.ids)
    tokens: list[int] = []
    entropies: list[float] = []
    surprisals: list[float] = []
    for _ in range(req.max_len):
        dist = req.provider.next_distribution(ctx)
        w = argmax_token(dist)
        if req.stop_at_eos and w == eos:
            break
        tokens.append(w)
        entropies.append(entropy_nats(dist))
        surprisals.append(float(-dist.logprobs[w]))
        ctx.append(w)
    return GenerationRecord(
        tokens=TokenSequence(ids=tuple(tokens), origin="generated"),
        entropies=entropies,
        surprisals=surprisals,
        greedy_flags=[True] * len(tokens),
        seed=req.seed,
        decoder="greedy",
    )


def stochastic_decode(req: DecodeRequest, policy: TruncationPolicy) -> GenerationRecord:
    """Sampling loop: temperature, truncation, then one inverse-CDF draw per step.

    Traces record the entropy/surprisal of the raw model distribution, not
    the truncated one; greedy_flags mark steps where the draw happened to
    coincide with the argmax.
    """
    eos = _eos_id(req.provider)
    rng = np.random.default_rng(req.seed)
    ctx = list(req.prefix.ids)
    tokens: list[int] = []
    entropies: list[float] = []
    surprisals: list[float] = []
    greedy_flags: list[bool] = []
    for _ in range(req.max_len):
        dist = req.provider.next_distribution(ctx)
        w = sample_from(apply_policy(dist, policy), rng)
        if req.stop_at_eos and w == eos:
            break
        tokens.append(w)
        entropies.append(entropy_nats(dist))
        surprisals.append(float(-dist.logprobs[w]))
        greedy_flags.append(w == argmax_token(dist))
        ctx.append(w)
    return GenerationRecord(
        tokens=TokenSequence(ids=tuple(tokens), origin="generated"),
        entropies=entropies,
        surprisals=surprisals,
        greedy_flags=greedy_flags,
        seed=req.seed,
        decoder="sample",
    )


@dataclass
class _Hypothesis:
    tokens: tuple[int, ...]
    score: float
    finished: bool = False


def banned_next_tokens(seq: tuple[int, ...], n: int) -> set[int]:
    """Tokens whose appending would repeat an n-gram already present in `seq`."""
    if n < 1 or len(seq) < n - 1:
        return set()
    tail = seq[len(seq) - (n - 1) :]
    banned: set[int] = set()
    for i in range(len(seq) - n + 1):
        if seq[i : i + n - 1] == tail:
            banned.add(seq[i + n - 1])
    return banned


def beam_search(
    req: DecodeRequest, n: int, block_ngram: int | None = None
) -> GenerationRecord:
    """Length-wise beam over summed log-probabilities, no length penalty.

    Hypotheses that emit EOS are set aside and compete with live ones by
    total score. With block_ngram=b, expansions that would repeat a b-gram
    within the hypothesis (prompt included) are scored -inf; if every
    expansion of every live hypothesis is blocked, the best finished
    hypothesis wins, or the search truncates with a "blocked-beam" flag.
    """
    if n < 1:
        raise InvalidParameterError(f"beam width must be >= 1, got {n}")
    eos = _eos_id(req.provider)
    prefix = tuple(req.prefix.ids)
    live: list[_Hypothesis] = [_Hypothesis(tokens=(), score=0.0)]
    finished: list[_Hypothesis] = []
    blocked_out = False

    for _ in range(req.max_len):
        scored: list[tuple[float, int, int]] = []  # (score, hyp index, token)
        for hi, hyp in enumerate(live):
            dist = req.provider.next_distribution(prefix + hyp.tokens)
            scores = hyp.score + dist.logprobs
            if block_ngram:
                banned = banned_next_tokens(prefix + hyp.tokens, block_ngram)
                if banned:
                    scores = scores.copy()
                    scores[list(banned)] = -np.inf
            order = np.lexsort((np.arange(len(scores)), -scores))
            for tok in order[: min(2 * n, len(scores))]:
                s = float(scores[tok])
                if s == -np.inf:
                    continue
                scored.append((s, hi, int(tok)))
        if not scored:
            blocked_out = True
            break
        scored.sort(key=lambda item: (-item[0], item[1], item[2]))
        # The top n candidates occupy the beam; EOS ones retire to the
        # finished pool and shrink the live beam (so beam-1 behaves exactly
        # like greedy: it stops only when EOS is the argmax).
        next_live: list[_Hypothesis] = []
        for s, hi, tok in scored[:n]:
            if req.stop_at_eos and tok == eos:
                finished.append(_Hypothesis(tokens=live[hi].tokens, score=s, finished=True))
            else:
                next_live.append(_Hypothesis(tokens=live[hi].tokens + (tok,), score=s))
        finished.sort(key=lambda h: (-h.score, h.tokens))
        del finished[n:]
        if not next_live:
            break
        live = next_live
        # Scores only fall as length grows, so a finished hypothesis at least
        # as good as the best live one cannot be beaten.
        if finished and finished[0].score >= max(h.score for h in live):
            break

    pool = finished + [h for h in live if h.tokens]
    if not pool:
        winner = _Hypothesis(tokens=(), score=0.0)
    else:
        winner = max(pool, key=lambda h: (h.score, h.finished, [-t for t in h.tokens]))

    flags: tuple[str, ...] = ("blocked-beam",) if blocked_out and not winner.finished else ()
    entropies: list[float] = []
    surprisals: list[float] = []
    greedy_flags: list[bool] = []
    for i, tok in enumerate(winner.tokens):
        dist = req.provider.next_distribution(prefix + winner.tokens[:i])
        entropies.append(entropy_nats(dist))
        surprisals.append(float(-dist.logprobs[tok]))
        greedy_flags.append(tok == argmax_token(dist))
    return GenerationRecord(
        tokens=TokenSequence(ids=winner.tokens, origin="generated"),
        entropies=entropies,
        surprisals=surprisals,
        greedy_flags=greedy_flags,
        seed=req.seed,
        decoder="beam",
        flags=flags,
    )


# -- record serialization ------------------------------------------------------


def record_to_json_line(record: GenerationRecord) -> str:
    """One-line structured-text form; traces rounded to 9 decimal places."""
    obj = {
        "decoder": record.decoder,
        "seed": record.seed,
        "tokens": list(record.tokens.ids),
        "entropies": [round(x, 9) for x in record.entropies],
        "surprisals": [round(x, 9) for x in record.surprisals],
        "greedy_flags": [int(f) for f in record.greedy_flags],
        "eui_count": record.eui_count,
        "backoff_count": record.backoff_count,
        "det_fraction": round(record.det_fraction, 9),
        "flags": list(record.flags),
    }
    return json.dumps(obj, separators=(",", ":"))


def record_from_json_line(line: str) -> GenerationRecord:
    obj = json.loads(line)
    return GenerationRecord(
        tokens=TokenSequence(ids=tuple(obj["tokens"]), origin="generated"),
        entropies=[float(x) for x in obj["entropies"]],
        surprisals=[float(x) for x in obj["surprisals"]],
        greedy_flags=[bool(x) for x in obj["greedy_flags"]],
        seed=int(obj["seed"]),
        decoder=obj["decoder"],
        eui_count=int(obj["eui_count"]),
        backoff_count=int(obj["backoff_count"]),
        flags=tuple(obj.get("flags", ())),
    )
