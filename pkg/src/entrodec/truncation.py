"""Temperature annealing, truncation policies, and the shared sampling step.

Every truncation keeps a subset of tokens and renormalizes; excluded tokens
get -inf log-probability (zero mass). Ordering ties are always broken by
lower token id so results are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dist import ConditionalDistribution, entropy_nats, _check_normalized
from .errors import InvalidParameterError

POLICY_KINDS = ("none", "top_k", "nucleus", "typical")


@dataclass(frozen=True)
class TruncationPolicy:
    """One sampling policy: temperature applied first, then the named truncation.

    Only the parameter matching `kind` is consulted (k for top_k, p for
    nucleus, tau for typical); the others are ignored.
    """

    kind: str = "none"
    k: int = 0
    p: float = 1.0
    tau: float = 1.0
    temperature: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in POLICY_KINDS:
            raise InvalidParameterError(f"unknown policy kind {self.kind!r}")
        if self.temperature <= 0:
            raise InvalidParameterError(f"temperature must be > 0, got {self.temperature}")

    def describe(self) -> str:
        if self.kind == "top_k":
            core = f"top_k:k={self.k}"
        elif self.kind == "nucleus":
            core = f"nucleus:p={self.p:g}"
        elif self.kind == "typical":
            core = f"typical:tau={self.tau:g}"
        else:
            core = "temperature"
        if self.kind == "none" or self.temperature != 1.0:
            core += f",t={self.temperature:g}"
        return core


def apply_policy(dist: ConditionalDistribution, policy: TruncationPolicy) -> ConditionalDistribution:
    """Temperature then truncation, per the policy."""
    out = apply_temperature(dist, policy.temperature)
    if policy.kind == "top_k":
        out = truncate_top_k(out, policy.k)
    elif policy.kind == "nucleus":
        out = truncate_nucleus(out, policy.p)
    elif policy.kind == "typical":
        out = truncate_typical(out, policy.tau)
    return out


def apply_temperature(dist: ConditionalDistribution, t: float) -> ConditionalDistribution:
    """Scale log-probabilities by 1/t and renormalize; t=1 is the exact identity."""
    if t <= 0:
        raise InvalidParameterError(f"temperature must be > 0, got {t}")
    if t == 1.0:
        return dist
    scaled = dist.logprobs / t
    finite = scaled[np.isfinite(scaled)]
    m = finite.max()
    log_z = m + np.log(np.exp(finite - m).sum())
    return ConditionalDistribution(logprobs=scaled - log_z, step=dist.step)


def _descending_order(dist: ConditionalDistribution) -> np.ndarray:
    # Stable sort on -logprob keeps equal-probability tokens in id order.
    return np.argsort(-dist.logprobs, kind="stable")


def _keep(dist: ConditionalDistribution, kept: np.ndarray) -> ConditionalDistribution:
    p = dist.probs
    mass = p[kept].sum()
    out = np.full(dist.vocab_size, -np.inf, dtype=np.float64)
    out[kept] = np.log(p[kept] / mass)
    return ConditionalDistribution(logprobs=out, step=dist.step)


def truncate_top_k(dist: ConditionalDistribution, k: int) -> ConditionalDistribution:
    """Keep the k most probable tokens (ties toward lower ids) and renormalize."""
    if not 1 <= k <= dist.vocab_size:
        raise InvalidParameterError(f"k must be in [1, {dist.vocab_size}], got {k}")
    if k == dist.vocab_size:
        return dist
    order = _descending_order(dist)
    return _keep(dist, order[:k])


def truncate_nucleus(dist: ConditionalDistribution, p: float) -> ConditionalDistribution:
    """Keep the smallest probability-sorted prefix with cumulative mass >= p."""
    if not 0 < p <= 1:
        raise InvalidParameterError(f"p must be in (0, 1], got {p}")
    order = _descending_order(dist)
    cum = np.cumsum(dist.probs[order])
    cut = int(np.searchsorted(cum, p, side="left"))
    if cut >= dist.vocab_size:
        cut = dist.vocab_size - 1
    return _keep(dist, order[: cut + 1])


def truncate_typical(dist: ConditionalDistribution, tau: float) -> ConditionalDistribution:
    """Keep tokens whose surprisal is closest to the distribution's entropy.

    Tokens are ranked by |surprisal - H| ascending, ties by higher
    probability then lower id; the smallest prefix reaching cumulative mass
    tau is kept. Tokens whose (deviation, probability) key exactly equals
    the last kept token's key are kept too, so an all-ties distribution
    (e.g. uniform) passes through unchanged.
    """
    if not 0 < tau <= 1:
        raise InvalidParameterError(f"tau must be in (0, 1], got {tau}")
    h = entropy_nats(dist)
    probs = dist.probs
    deviation = np.abs(-dist.logprobs - h)
    order = np.lexsort((np.arange(dist.vocab_size), -probs, deviation))
    cum = np.cumsum(probs[order])
    cut = int(np.searchsorted(cum, tau, side="left"))
    if cut >= dist.vocab_size:
        cut = dist.vocab_size - 1
    last = order[cut]
    while cut + 1 < dist.vocab_size:
        nxt = order[cut + 1]
        if deviation[nxt] == deviation[last] and probs[nxt] == probs[last]:
            cut += 1
        else:
            break
    return _keep(dist, order[: cut + 1])


def sample_from(dist: ConditionalDistribution, rng: np.random.Generator) -> int:
    """Inverse-CDF sample over token-id order using one uniform draw."""
    p = _check_normalized(dist)
    cum = np.cumsum(p)
    u = rng.random()
    idx = int(np.searchsorted(cum, u, side="right"))
    if idx >= len(p):
        idx = int(np.flatnonzero(p > 0)[-1])
    return idx
