"""Experiment configuration: flat key-value files and decoder spec strings.

A config file is plain text, one `key = value` per line, `#` comments.
Unknown keys are errors. The `decoder` key may repeat; each occurrence
adds one decoder configuration to the sweep grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import ConfigError
from .truncation import TruncationPolicy

DECODER_KINDS = ("greedy", "beam", "top_k", "nucleus", "typical", "temperature", "ead")

_BOOL_VALUES = {"true": True, "false": False, "1": True, "0": False}


@dataclass(frozen=True)
class DecoderSpec:
    """One decoder configuration: a kind plus its parameters."""

    kind: str
    params: dict = field(default_factory=dict)

    @property
    def config_id(self) -> str:
        if not self.params:
            return self.kind
        # Semicolon-joined so the id stays a single CSV field.
        inner = ";".join(f"{k}={_fmt(v)}" for k, v in sorted(self.params.items()))
        return f"{self.kind}:{inner}"

    def param(self, name: str, default=None):
        return self.params.get(name, default)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:g}"
    return str(v)


_PARAM_TYPES = {
    "greedy": {},
    "beam": {"n": int, "block": int},
    "top_k": {"k": int, "t": float},
    "nucleus": {"p": float, "t": float},
    "typical": {"tau": float, "t": float},
    "temperature": {"t": float},
    "ead": {
        "sampler": str,
        "k": int,
        "p": float,
        "tau": float,
        "t": float,
        "n": int,
        "alpha": float,
        "g": int,
        "max_backoffs": int,
        "eui": bool,
        "eli": bool,
    },
}

_REQUIRED = {
    "top_k": ("k",),
    "nucleus": ("p",),
    "typical": ("tau",),
    "temperature": ("t",),
    "ead": ("sampler",),
}


def parse_decoder_spec(text: str) -> DecoderSpec:
    """Parse e.g. "top_k k=30 t=0.9" or "ead sampler=typical tau=0.2 n=5 alpha=0.5 g=10"."""
    parts = text.split()
    if not parts:
        raise ConfigError("empty decoder spec")
    kind = parts[0]
    if kind not in DECODER_KINDS:
        raise ConfigError(f"unknown decoder kind {kind!r}")
    types = _PARAM_TYPES[kind]
    params: dict = {}
    for item in parts[1:]:
        name, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"decoder parameter {item!r} is not name=value")
        if name not in types:
            raise ConfigError(f"decoder {kind!r} does not take parameter {name!r}")
        ty = types[name]
        try:
            if ty is bool:
                params[name] = _BOOL_VALUES[raw.lower()]
            else:
                params[name] = ty(raw)
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"bad value {raw!r} for {kind}.{name}") from exc
    for req in _REQUIRED.get(kind, ()):
        if req not in params:
            raise ConfigError(f"decoder {kind!r} requires parameter {req!r}")
    if kind == "ead" and params["sampler"] not in ("top_k", "nucleus", "typical", "temperature"):
        raise ConfigError(f"unknown ead sampler {params['sampler']!r}")
    return DecoderSpec(kind=kind, params=params)


def policy_from_spec(spec: DecoderSpec) -> TruncationPolicy:
    """Truncation policy for a sampling decoder (or an ead spec's fallback sampler)."""
    kind = spec.param("sampler", spec.kind) if spec.kind == "ead" else spec.kind
    t = float(spec.param("t", 1.0))
    if kind == "top_k":
        return TruncationPolicy(kind="top_k", k=int(spec.param("k", 0)), temperature=t)
    if kind == "nucleus":
        return TruncationPolicy(kind="nucleus", p=float(spec.param("p", 1.0)), temperature=t)
    if kind == "typical":
        return TruncationPolicy(kind="typical", tau=float(spec.param("tau", 1.0)), temperature=t)
    if kind == "temperature":
        return TruncationPolicy(kind="none", temperature=t)
    raise ConfigError(f"decoder {spec.kind!r} has no sampling policy")


# The full configuration grid studied in the sweep appendix.
PAPER_GRID = tuple(
    [parse_decoder_spec(f"top_k k={k}") for k in (5, 10, 30, 50, 100)]
    + [parse_decoder_spec(f"nucleus p={p}") for p in (0.15, 0.25, 0.4, 0.5, 0.75, 0.9, 0.95)]
    + [
        parse_decoder_spec(f"temperature t={t}")
        for t in (0.001, 0.01, 0.1, 0.2, 0.5, 0.8, 1.0, 1.2, 1.5, 3.0)
    ]
    + [parse_decoder_spec(f"typical tau={tau}") for tau in (0.2, 0.25, 0.5, 0.75, 0.9, 0.95)]
)

# A 12-point subset that spans the same qualitative range at desk scale.
DESK_GRID = tuple(
    [parse_decoder_spec(f"top_k k={k}") for k in (5, 30, 100)]
    + [parse_decoder_spec(f"nucleus p={p}") for p in (0.4, 0.9)]
    + [parse_decoder_spec(f"temperature t={t}") for t in (0.1, 0.5, 1.0, 1.5, 3.0)]
    + [parse_decoder_spec(f"typical tau={tau}") for tau in (0.2, 0.9)]
)

GRID_PRESETS = {"paper": PAPER_GRID, "desk": DESK_GRID}


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a profiling run or decoding sweep needs, declaratively."""

    corpus_path: str = ""
    model_path: str = ""
    profile_path: str = ""
    out_dir: str = "out"
    min_count: int = 2
    order: int = 4
    window: int = 5
    horizon: int = 64
    prefix_len: int = 32
    gen_len: int = 64
    eval_size: int = 200
    zone_width: float = 1.5
    holdout_every: int = 10
    seeds: tuple[int, ...] = (1, 2, 3)
    provider: str = "local"
    endpoint: str = ""
    mode: str = "text-completion"
    decoders: tuple[DecoderSpec, ...] = ()

    def __post_init__(self) -> None:
        if not self.seeds:
            raise ConfigError("seeds must be non-empty")
        if self.prefix_len < 1 or self.gen_len < 1:
            raise ConfigError("prefix_len and gen_len must be >= 1")
        if self.provider not in ("local", "remote"):
            raise ConfigError(f"provider must be local or remote, got {self.provider!r}")
        if self.provider == "remote" and not self.endpoint:
            raise ConfigError("remote provider needs an endpoint")


_STR_KEYS = {
    "corpus": "corpus_path",
    "model": "model_path",
    "profile": "profile_path",
    "out_dir": "out_dir",
    "provider": "provider",
    "endpoint": "endpoint",
    "mode": "mode",
}
_INT_KEYS = {
    "min_count",
    "order",
    "window",
    "horizon",
    "prefix_len",
    "gen_len",
    "eval_size",
    "holdout_every",
}
_FLOAT_KEYS = {"zone_width"}


def parse_config_text(text: str) -> ExperimentConfig:
    cfg = ExperimentConfig()
    decoders: list[DecoderSpec] = []
    seeds: tuple[int, ...] | None = None
    updates: dict = {}
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (part.strip() for part in line.partition("="))
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        try:
            if key == "decoder":
                decoders.append(parse_decoder_spec(value))
            elif key == "grid":
                if value not in GRID_PRESETS:
                    raise ConfigError(f"unknown grid preset {value!r}")
                decoders.extend(GRID_PRESETS[value])
            elif key == "seeds":
                seeds = tuple(int(s) for s in value.split(",") if s.strip())
            elif key in _STR_KEYS:
                updates[_STR_KEYS[key]] = value
            elif key in _INT_KEYS:
                updates[key] = int(value)
            elif key in _FLOAT_KEYS:
                updates[key] = float(value)
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    if seeds is not None:
        updates["seeds"] = seeds
    if decoders:
        updates["decoders"] = tuple(decoders)
    return replace(cfg, **updates)


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())
