"""Deterministic synthetic corpus for desk-scale experiments and tests.

The generator emits encyclopedia-flavored lines (~115 words each) mixing
three ingredients:

* topical sentences built from function-word templates with content slots
  filled from per-topic word pools (diverse, keeps conditional entropy up);
* a small family of formulaic sentences repeated verbatim thousands of
  times (predictable n-gram chains that deterministic decoding locks onto);
* punctuation as standalone tokens, so the whitespace tokenizer stays
  lossless.

Everything is a pure function of the seed; the same (seed, n_lines) always
produces byte-identical text.
"""

from __future__ import annotations

import numpy as np

CORPUS_ID = "synthpedia-v1"
FIXTURE_SEED = 20260801
DEFAULT_N_LINES = 3000

# Words here must stay inside the bundled stop-word list so that F1's
# stop-word filtering removes exactly the scaffolding.
_DET = ["the", "a"]
_PREPS = ["of", "in", "on", "with", "for", "at", "by", "from", "under", "over"]

_SYLLABLE_ONSETS = list("bdfglmnprstvz") + ["br", "dr", "gr", "kr", "pl", "st", "tr"]
_SYLLABLE_NUCLEI = ["a", "e", "i", "o", "u", "ar", "en", "il", "or", "ul"]

_N_NOUNS = 700
_N_VERBS = 200
_N_ADJS = 240
_N_TOPICS = 40
_TOPIC_NOUNS = 25
_TOPIC_VERBS = 12
_TOPIC_ADJS = 12

# Fraction of sentences drawn from the formulaic family.
_FORMULA_RATE = 0.16
_MIN_LINE_WORDS = 108

# All formulaic sentences share the "the committee of" opening so the
# corpus has one dominant continuation after sentence boundaries.
_FORMULAS = [
    "the committee of public works met in the first month of the year .",
    "the committee of public works approved the report of the council .",
    "the committee of the northern district was formed in the same year .",
    "the committee of the northern district published the annual report .",
    "the committee of public safety met at the hall of the assembly .",
    "the committee of the southern province closed the session of the assembly .",
    "the committee of public works opened the new bridge over the river .",
    "the committee of the eastern region met before the end of the year .",
]

_TEMPLATES = [
    ("the", "ADJ", "N", "of", "the", "N", "V", "the", "N", "."),
    ("the", "N", "V", "the", "N", "and", "the", "N", "V", "the", "ADJ", "N", "."),
    ("in", "the", "N", "the", "ADJ", "N", "V", "a", "N", "."),
    ("the", "N", "of", "the", "N", "was", "ADJ", "and", "the", "N", "was", "ADJ", "."),
    ("a", "N", "of", "the", "N", "V", "the", "N", "after", "the", "N", "."),
    ("the", "ADJ", "N", "in", "the", "N", "V", "the", "N", "of", "the", "N", "."),
    ("when", "the", "N", "V", "the", "N", ",", "the", "ADJ", "N", "V", "the", "N", "."),
    ("the", "N", "V", "with", "the", "N", "from", "the", "ADJ", "N", "."),
    ("the", "N", "was", "ADJ", "in", "the", "N", "of", "the", "N", "."),
    ("a", "ADJ", "N", "V", "the", "N", "between", "the", "N", "and", "the", "N", "."),
]


def _make_words(rng: np.random.Generator, count: int, taken: set[str]) -> list[str]:
    words: list[str] = []
    while len(words) < count:
        n_syll = int(rng.integers(2, 4))
        parts = []
        for _ in range(n_syll):
            parts.append(str(rng.choice(_SYLLABLE_ONSETS)))
            parts.append(str(rng.choice(_SYLLABLE_NUCLEI)))
        w = "".join(parts)
        if w in taken or len(w) < 4:
            continue
        taken.add(w)
        words.append(w)
    return words


class _Topic:
    __slots__ = ("nouns", "verbs", "adjs")

    def __init__(self, rng: np.random.Generator, nouns, verbs, adjs) -> None:
        self.nouns = list(rng.choice(nouns, size=_TOPIC_NOUNS, replace=False))
        self.verbs = list(rng.choice(verbs, size=_TOPIC_VERBS, replace=False))
        self.adjs = list(rng.choice(adjs, size=_TOPIC_ADJS, replace=False))


def _fill_template(rng: np.random.Generator, template, topic: _Topic) -> list[str]:
    out: list[str] = []
    for slot in template:
        if slot == "N":
            out.append(str(rng.choice(topic.nouns)))
        elif slot == "V":
            out.append(str(rng.choice(topic.verbs)))
        elif slot == "ADJ":
            out.append(str(rng.choice(topic.adjs)))
        else:
            out.append(slot)
    return out


def build_fixture_lines(
    n_lines: int = DEFAULT_N_LINES, seed: int = FIXTURE_SEED
) -> list[str]:
    """Generate the corpus as a list of document lines."""
    rng = np.random.default_rng(seed)
    taken: set[str] = set()
    for f in _FORMULAS:
        taken.update(f.split())
    nouns = _make_words(rng, _N_NOUNS, taken)
    verbs = _make_words(rng, _N_VERBS, taken)
    adjs = _make_words(rng, _N_ADJS, taken)
    topics = [_Topic(rng, nouns, verbs, adjs) for _ in range(_N_TOPICS)]
    formula_weights = np.array([1.0 / (i + 1) for i in range(len(_FORMULAS))])
    formula_weights /= formula_weights.sum()

    lines: list[str] = []
    for _ in range(n_lines):
        topic = topics[int(rng.integers(0, _N_TOPICS))]
        words: list[str] = []
        while len(words) < _MIN_LINE_WORDS:
            if rng.random() < _FORMULA_RATE:
                idx = int(rng.choice(len(_FORMULAS), p=formula_weights))
                words.extend(_FORMULAS[idx].split())
            else:
                template = _TEMPLATES[int(rng.integers(0, len(_TEMPLATES)))]
                words.extend(_fill_template(rng, template, topic))
        lines.append(" ".join(words))
    return lines


def write_fixture_corpus(
    path: str, n_lines: int = DEFAULT_N_LINES, seed: int = FIXTURE_SEED
) -> str:
    lines = build_fixture_lines(n_lines, seed)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return path
