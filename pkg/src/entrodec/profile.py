"""Entropy baseline estimation, the calibration band around it, and violation scoring.

A profile records, per completion timestep, the mean and standard deviation
of smoothed entropy measured while teacher-forcing held-out targets. Bands
around that baseline (mu +- width * sigma) classify any other trace's steps
as in-band, below, or above.
"""

from __future__ import annotations

import hashlib
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dist import entropy_nats, smooth_trace, surprisal_nats
from .errors import (
    EmptyDatasetError,
    FileFormatError,
    InsufficientDataError,
    InvalidParameterError,
    ZeroLengthError,
)
from .vocab import TokenSequence

PROFILE_FORMAT_VERSION = "ECPROF1"

DEFAULT_SMOOTHING_WINDOW = 5
DEFAULT_ZONE_WIDTH = 1.5


@dataclass
class EntropyTrace:
    """Per-step entropy of a model along one token sequence."""

    raw: list[float]
    smoothed: list[float]
    window: int
    surprisal_smoothed: list[float] | None = None

    def __post_init__(self) -> None:
        if len(self.raw) != len(self.smoothed):
            raise InvalidParameterError("raw and smoothed traces must have equal length")

    @property
    def length(self) -> int:
        return len(self.raw)


@dataclass
class StableEntropyProfile:
    """Per-timestep mean/stddev of smoothed entropy under teacher-forced targets."""

    mu: np.ndarray
    sigma: np.ndarray
    count: np.ndarray
    window: int
    horizon: int
    model_hash: str = ""
    corpus_id: str = ""

    def __post_init__(self) -> None:
        n = self.horizon + 1
        if not (len(self.mu) == len(self.sigma) == len(self.count) == n):
            raise InvalidParameterError("profile arrays must have length horizon + 1")


@dataclass(frozen=True)
class ZoneBounds:
    """Elementwise band mu +- width * sigma over the profiled horizon."""

    lower: np.ndarray
    upper: np.ndarray
    width_multiplier: float


@dataclass(frozen=True)
class LineFit:
    """Ordinary least squares fit of mu over timesteps."""

    slope: float
    intercept: float
    mse: float


@dataclass(frozen=True)
class ViolationStats:
    """Counts and ratios of band breaches for one trace."""

    n_steps: int
    n_lower: int
    n_upper: int

    @property
    def elvr(self) -> float:
        return self.n_lower / self.n_steps

    @property
    def euvr(self) -> float:
        return self.n_upper / self.n_steps

    @property
    def evr(self) -> float:
        # Defined as the sum of the two ratios, so the identity is exact.
        return self.elvr + self.euvr


class RunningMoments:
    """Mean/variance accumulator with an associative merge (count/mean/M2)."""

    __slots__ = ("count", "mean", "m2")

    def __init__(self) -> None:
        self.count = 0
        self.mean = 0.0
        self.m2 = 0.0

    def update(self, x: float) -> None:
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (x - self.mean)

    def merge(self, other: "RunningMoments") -> "RunningMoments":
        merged = RunningMoments()
        n = self.count + other.count
        if n == 0:
            return merged
        delta = other.mean - self.mean
        merged.count = n
        merged.mean = self.mean + delta * other.count / n
        merged.m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / n
        return merged

    def population_std(self) -> float:
        if self.count == 0:
            return 0.0
        return math.sqrt(max(self.m2 / self.count, 0.0))


def trace_under_targets(
    provider,
    prefix: TokenSequence,
    target: TokenSequence,
    window: int = DEFAULT_SMOOTHING_WINDOW,
) -> EntropyTrace:
    """Teacher-forced trace: feed prefix + target[:t] and record entropy at each step.

    Also records the smoothed surprisal of each realized target token.
    """
    if len(target) == 0:
        raise InvalidParameterError("target must be non-empty")
    ctx = list(prefix.ids)
    raw: list[float] = []
    surprisals: list[float] = []
    for tok in target.ids:
        dist = provider.next_distribution(ctx)
        raw.append(entropy_nats(dist))
        surprisals.append(surprisal_nats(dist, tok))
        ctx.append(tok)
    return EntropyTrace(
        raw=raw,
        smoothed=smooth_trace(raw, window),
        window=window,
        surprisal_smoothed=smooth_trace(surprisals, window),
    )


def estimate_profile(
    provider,
    dataset: Sequence[tuple[TokenSequence, TokenSequence]],
    window: int = DEFAULT_SMOOTHING_WINDOW,
    horizon: int = 128,
    corpus_id: str = "",
) -> StableEntropyProfile:
    """Mean/stddev of smoothed entropy per timestep over teacher-forced pairs.

    Standard deviation is the population form, so a single-item dataset
    yields sigma identically zero. Steps past `horizon`, or past the longest
    target, are not profiled; the effective horizon shrinks accordingly.
    Accumulation uses associative merges, so splitting the dataset across
    workers and merging gives identical results.
    """
    if not dataset:
        raise EmptyDatasetError("cannot profile an empty dataset")
    if horizon < 1:
        raise InvalidParameterError(f"horizon must be >= 1, got {horizon}")
    accs: list[RunningMoments] = [RunningMoments() for _ in range(horizon + 1)]
    for prefix, target in dataset:
        trace = trace_under_targets(provider, prefix, target, window)
        for t, value in enumerate(trace.smoothed[: horizon + 1]):
            accs[t].update(value)
    max_t = max((t for t, a in enumerate(accs) if a.count > 0), default=-1)
    if max_t < 0:
        raise EmptyDatasetError("dataset produced no trace steps")
    accs = accs[: max_t + 1]
    return StableEntropyProfile(
        mu=np.array([a.mean for a in accs], dtype=np.float64),
        sigma=np.array([a.population_std() for a in accs], dtype=np.float64),
        count=np.array([a.count for a in accs], dtype=np.int64),
        window=window,
        horizon=max_t,
        model_hash=getattr(provider, "model_hash", ""),
        corpus_id=corpus_id,
    )


def zone_bounds(
    profile: StableEntropyProfile, width: float, t: int
) -> tuple[float, float]:
    """Band bounds at step t, clamping past the profiled horizon.

    The baseline is flat, so holding the last profiled values is the
    faithful extension. An infinite width yields (-inf, +inf) regardless
    of sigma.
    """
    if width <= 0:
        raise InvalidParameterError(f"width must be > 0, got {width}")
    if math.isinf(width):
        return (-math.inf, math.inf)
    tt = min(max(t, 0), profile.horizon)
    mu = float(profile.mu[tt])
    half = width * float(profile.sigma[tt])
    return (mu - half, mu + half)


def zone_arrays(profile: StableEntropyProfile, width: float) -> ZoneBounds:
    """Vectorized band over the whole profiled horizon."""
    if width <= 0:
        raise InvalidParameterError(f"width must be > 0, got {width}")
    half = width * profile.sigma
    return ZoneBounds(lower=profile.mu - half, upper=profile.mu + half, width_multiplier=width)


def fit_line(profile: StableEntropyProfile, t_min: int | None = None) -> LineFit:
    """OLS line through (t, mu[t]) for t in [t_min, horizon].

    t_min defaults to the smoothing window, skipping the warm-up steps where
    partial windows make the baseline unstable.
    """
    if t_min is None:
        t_min = profile.window
    if profile.horizon - t_min < 2:
        raise InsufficientDataError(
            f"need horizon - t_min >= 2, got horizon={profile.horizon}, t_min={t_min}"
        )
    xs = np.arange(t_min, profile.horizon + 1, dtype=np.float64)
    ys = profile.mu[t_min : profile.horizon + 1]
    x_mean = xs.mean()
    y_mean = ys.mean()
    var = float(((xs - x_mean) ** 2).sum())
    cov = float(((xs - x_mean) * (ys - y_mean)).sum())
    slope = cov / var
    intercept = y_mean - slope * x_mean
    residuals = ys - (slope * xs + intercept)
    return LineFit(slope=slope, intercept=intercept, mse=float((residuals**2).mean()))


def detect_violations(
    trace: EntropyTrace, profile: StableEntropyProfile, width: float = DEFAULT_ZONE_WIDTH
) -> ViolationStats:
    """Classify each smoothed-trace step against the band at that step."""
    if trace.length == 0:
        raise ZeroLengthError("cannot score an empty trace")
    n_lower = 0
    n_upper = 0
    for t, value in enumerate(trace.smoothed):
        lower, upper = zone_bounds(profile, width, t)
        if value < lower:
            n_lower += 1
        elif value > upper:
            n_upper += 1
    return ViolationStats(n_steps=trace.length, n_lower=n_lower, n_upper=n_upper)


def in_zone_fraction(
    trace: EntropyTrace, profile: StableEntropyProfile, width: float = DEFAULT_ZONE_WIDTH
) -> float:
    """Fraction of trace steps inside the band (1 - EVR)."""
    stats = detect_violations(trace, profile, width)
    return 1.0 - stats.evr


# -- profile file format -----------------------------------------------------


def profile_to_text(profile: StableEntropyProfile) -> str:
    out = io.StringIO()
    out.write(f"{PROFILE_FORMAT_VERSION}\n")
    out.write(f"window {profile.window}\n")
    out.write(f"horizon {profile.horizon}\n")
    out.write(f"model_hash {profile.model_hash or '-'}\n")
    out.write(f"corpus_id {profile.corpus_id or '-'}\n")
    out.write("t mu sigma count\n")
    for t in range(profile.horizon + 1):
        out.write(
            f"{t} {profile.mu[t]:.9f} {profile.sigma[t]:.9f} {int(profile.count[t])}\n"
        )
    return out.getvalue()


def save_profile(profile: StableEntropyProfile, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(profile_to_text(profile))


def profile_from_text(text: str) -> StableEntropyProfile:
    lines = text.strip().split("\n")
    if not lines or lines[0] != PROFILE_FORMAT_VERSION:
        raise FileFormatError("not a profile file (bad version header)")
    try:
        window = int(lines[1].split()[1])
        horizon = int(lines[2].split()[1])
        model_hash = lines[3].split()[1]
        corpus_id = lines[4].split()[1]
        rows = [line.split() for line in lines[6 : 6 + horizon + 1]]
        mu = np.array([float(r[1]) for r in rows])
        sigma = np.array([float(r[2]) for r in rows])
        count = np.array([int(r[3]) for r in rows])
    except (IndexError, ValueError) as exc:
        raise FileFormatError(f"garbled profile file: {exc}") from exc
    if len(rows) != horizon + 1:
        raise FileFormatError("profile row count does not match horizon")
    return StableEntropyProfile(
        mu=mu,
        sigma=sigma,
        count=count,
        window=window,
        horizon=horizon,
        model_hash="" if model_hash == "-" else model_hash,
        corpus_id="" if corpus_id == "-" else corpus_id,
    )


def load_profile(path: str) -> StableEntropyProfile:
    with open(path, "r", encoding="utf-8") as fh:
        return profile_from_text(fh.read())


def dataset_fingerprint(pairs: Sequence[tuple[TokenSequence, TokenSequence]]) -> str:
    """Short stable id for an evaluation set, for provenance headers."""
    h = hashlib.sha256()
    for prefix, target in pairs:
        h.update(b"p")
        h.update(np.asarray(prefix.ids, dtype=np.int64).tobytes())
        h.update(b"t")
        h.update(np.asarray(target.ids, dtype=np.int64).tobytes())
    return h.hexdigest()[:12]
