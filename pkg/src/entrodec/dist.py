"""Next-token distributions and the entropy/surprisal/smoothing primitives.

All log quantities are in nats. Distributions are stored as log-probability
vectors; truncated distributions may contain -inf entries (zero mass), but
model providers always return full-support vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDistributionError, InvalidIdError, InvalidParameterError

# |sum(p) - 1| beyond this means the vector is not a probability distribution.
NORMALIZATION_TOL = 1e-6


@dataclass(eq=False)
class ConditionalDistribution:
    """A full next-token distribution at one timestep, as log-probabilities."""

    logprobs: np.ndarray
    step: int = 0
    _probs: np.ndarray | None = field(default=None, repr=False)

    @property
    def vocab_size(self) -> int:
        return int(self.logprobs.shape[0])

    @property
    def probs(self) -> np.ndarray:
        if self._probs is None:
            p = np.exp(self.logprobs)
            p.flags.writeable = False
            self._probs = p
        return self._probs

    @staticmethod
    def from_probs(probs: np.ndarray, step: int = 0) -> "ConditionalDistribution":
        """Wrap a probability vector; zero entries become -inf log-probabilities."""
        p = np.asarray(probs, dtype=np.float64)
        with np.errstate(divide="ignore"):
            lp = np.log(p)
        return ConditionalDistribution(logprobs=lp, step=step)


def _check_normalized(dist: ConditionalDistribution) -> np.ndarray:
    p = dist.probs
    total = float(p.sum())
    if not math.isfinite(total) or abs(total - 1.0) > NORMALIZATION_TOL:
        raise InvalidDistributionError(f"probabilities sum to {total!r}, not 1")
    return p


def entropy_nats(dist: ConditionalDistribution) -> float:
    """Shannon entropy -sum(p * log p) of the distribution, in nats.

    Zero-probability entries contribute nothing (the 0*log 0 = 0 limit),
    so truncated distributions are handled too. The result is clamped to
    the valid range [0, ln V].
    """
    p = _check_normalized(dist)
    mask = p > 0.0
    h = -float(np.dot(p[mask], dist.logprobs[mask]))
    return min(max(h, 0.0), math.log(dist.vocab_size))


def surprisal_nats(dist: ConditionalDistribution, token: int) -> float:
    """-log p(token) under the distribution, in nats."""
    if not 0 <= token < dist.vocab_size:
        raise InvalidIdError(f"token id {token} out of range [0, {dist.vocab_size})")
    return float(-dist.logprobs[token])


def smooth_trace(values, window: int) -> list[float]:
    """Trailing mean over the inclusive window [t - window, t].

    Early steps average over however many values exist (partial-window
    convention), so the output has the same length as the input and a
    constant input stays constant.
    """
    if window < 1:
        raise InvalidParameterError(f"window must be >= 1, got {window}")
    vals = [float(v) for v in values]
    out: list[float] = []
    for t in range(len(vals)):
        lo = max(0, t - window)
        chunk = vals[lo : t + 1]
        out.append(sum(chunk) / len(chunk))
    return out
