"""Test-only model providers and independent reference implementations."""

from __future__ import annotations

import math

import numpy as np

from entrodec.dist import ConditionalDistribution
from entrodec.profile import StableEntropyProfile
from entrodec.vocab import TokenSequence


class ScriptedProvider:
    """Provider returning prescribed probability vectors per full context.

    Contexts are keyed by their complete id tuple; anything unscripted gets
    the default vector. Deterministic and stateless, like the contract
    demands.
    """

    def __init__(self, vocab_size: int, table: dict, default: np.ndarray):
        self.vocab_size_ = vocab_size
        self.table = {tuple(k): np.asarray(v, dtype=np.float64) for k, v in table.items()}
        self.default = np.asarray(default, dtype=np.float64)
        self.model_hash = "scripted"

    def vocab_info(self):
        return self.vocab_size_, {"pad": 0, "unk": 1, "bos": 2, "eos": 3}

    def next_distribution(self, context):
        ids = tuple(context.ids if isinstance(context, TokenSequence) else context)
        probs = self.table.get(ids, self.default)
        return ConditionalDistribution.from_probs(probs, step=len(ids))

    def encode(self, text: str) -> TokenSequence:
        raise NotImplementedError("scripted providers have no tokenizer")

    def decode(self, seq: TokenSequence) -> str:
        raise NotImplementedError("scripted providers have no tokenizer")


class UniformProvider:
    """Always the uniform distribution, any context."""

    def __init__(self, vocab_size: int):
        self.vocab_size_ = vocab_size
        self.model_hash = f"uniform-{vocab_size}"
        self._probs = np.full(vocab_size, 1.0 / vocab_size)

    def vocab_info(self):
        return self.vocab_size_, {"pad": 0, "unk": 1, "bos": 2, "eos": 3}

    def next_distribution(self, context):
        ids = tuple(context.ids if isinstance(context, TokenSequence) else context)
        return ConditionalDistribution.from_probs(self._probs, step=len(ids))


def spread_dist(vocab_size: int, peaks: dict[int, float]) -> np.ndarray:
    """Probability vector with given peak masses, remainder spread evenly."""
    p = np.zeros(vocab_size)
    total = sum(peaks.values())
    assert total < 1.0
    rest = (1.0 - total) / (vocab_size - len(peaks))
    p[:] = rest
    for tok, mass in peaks.items():
        p[tok] = mass
    return p


def flat_profile(
    mu: float, sigma: float, horizon: int, window: int = 5, model_hash: str = ""
) -> StableEntropyProfile:
    """Constant-baseline profile for scripted decoding tests."""
    n = horizon + 1
    return StableEntropyProfile(
        mu=np.full(n, mu),
        sigma=np.full(n, sigma),
        count=np.ones(n, dtype=np.int64),
        window=window,
        horizon=horizon,
        model_hash=model_hash,
    )


# -- independent oracles -------------------------------------------------------


def oracle_entropy(probs) -> float:
    return -sum(p * math.log(p) for p in probs if p > 0)


def oracle_windowed_mean(values, window: int) -> list[float]:
    out = []
    for t in range(len(values)):
        chunk = values[max(0, t - window) : t + 1]
        out.append(float(np.mean(chunk)))
    return out


def oracle_top_k_set(probs, k: int) -> set[int]:
    order = sorted(range(len(probs)), key=lambda i: (-probs[i], i))
    return set(order[:k])


def oracle_nucleus_set(probs, p: float) -> set[int]:
    order = sorted(range(len(probs)), key=lambda i: (-probs[i], i))
    kept, mass = [], 0.0
    for i in order:
        kept.append(i)
        mass += probs[i]
        if mass >= p:
            break
    return set(kept)


def oracle_typical_set(probs, tau: float) -> set[int]:
    h = oracle_entropy(probs)
    order = sorted(
        range(len(probs)), key=lambda i: (abs(-math.log(probs[i]) - h), -probs[i], i)
    )
    kept, mass = [], 0.0
    for i in order:
        kept.append(i)
        mass += probs[i]
        if mass >= tau:
            break
    return set(kept)


def oracle_renormalize(probs, kept: set[int]) -> list[float]:
    mass = sum(probs[i] for i in kept)
    return [probs[i] / mass if i in kept else 0.0 for i in range(len(probs))]


def oracle_ngram_repeats(ids, n: int) -> int:
    grams = [tuple(ids[i : i + n]) for i in range(len(ids) - n + 1)]
    return len(grams) - len(set(grams))


def oracle_repeat_score5(ids) -> float:
    reps = [oracle_ngram_repeats(ids, n) for n in range(1, 6)]
    cuml = sum(reps)
    if cuml == 0:
        return 0.0
    weighted = sum((2**n) * reps[n - 1] for n in range(1, 6))
    return math.log2(weighted / cuml) * reps[0] / len(ids)


def random_distribution(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.dirichlet(np.ones(size))
