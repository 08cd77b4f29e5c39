"""Word-level vocabulary and token sequences.

Tokenization is lowercase whitespace splitting. Ids are dense, with the
four special tokens pinned to the lowest ids so they survive any
frequency cutoff.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .errors import CorpusEmptyError, InvalidIdError, InvalidParameterError

PAD = "<pad>"
UNK = "<unk>"
BOS = "<bos>"
EOS = "<eos>"

SPECIAL_TOKENS = (PAD, UNK, BOS, EOS)


def tokenize(text: str) -> list[str]:
    """Lowercase whitespace tokenization; the single splitting rule used everywhere."""
    return text.lower().split()


@dataclass(frozen=True)
class Vocabulary:
    """Dense token<->id mapping with pinned special ids."""

    tokens: tuple[str, ...]
    ids: dict[str, int] = field(repr=False)

    def __post_init__(self) -> None:
        if self.tokens[: len(SPECIAL_TOKENS)] != SPECIAL_TOKENS:
            raise InvalidParameterError("special tokens must occupy the lowest ids")

    @property
    def size(self) -> int:
        return len(self.tokens)

    @property
    def pad_id(self) -> int:
        return 0

    @property
    def unk_id(self) -> int:
        return 1

    @property
    def bos_id(self) -> int:
        return 2

    @property
    def eos_id(self) -> int:
        return 3

    @property
    def special_ids(self) -> frozenset[int]:
        return frozenset((self.pad_id, self.unk_id, self.bos_id, self.eos_id))

    def id_of(self, token: str) -> int:
        """Id for a surface form, falling back to the unknown id."""
        return self.ids.get(token, self.unk_id)

    def token_of(self, token_id: int) -> str:
        if not 0 <= token_id < len(self.tokens):
            raise InvalidIdError(f"token id {token_id} out of range [0, {len(self.tokens)})")
        return self.tokens[token_id]

    @staticmethod
    def from_words(words: Iterable[str]) -> "Vocabulary":
        """Build a vocabulary from regular (non-special) words, already ordered."""
        tokens = list(SPECIAL_TOKENS)
        seen = set(tokens)
        for w in words:
            if w in seen:
                continue
            seen.add(w)
            tokens.append(w)
        toks = tuple(tokens)
        return Vocabulary(tokens=toks, ids={t: i for i, t in enumerate(toks)})


@dataclass(frozen=True)
class TokenSequence:
    """An id sequence plus where it came from (corpus target vs. generated)."""

    ids: tuple[int, ...]
    origin: str = "corpus-target"

    def __len__(self) -> int:
        return len(self.ids)

    def __iter__(self) -> Iterator[int]:
        return iter(self.ids)

    def __getitem__(self, i):
        return self.ids[i]


def build_vocabulary(lines: Iterable[str], min_count: int = 1) -> Vocabulary:
    """Count whitespace tokens over `lines` and keep those seen >= min_count times.

    Ordering of regular tokens is frequency-descending, ties broken
    lexicographically, so identical corpora always yield identical ids.
    """
    if min_count < 1:
        raise InvalidParameterError(f"min_count must be >= 1, got {min_count}")
    counts: Counter[str] = Counter()
    for line in lines:
        counts.update(tokenize(line))
    if not counts:
        raise CorpusEmptyError("corpus contains no tokens")
    kept = [t for t, c in counts.items() if c >= min_count and t not in SPECIAL_TOKENS]
    kept.sort(key=lambda t: (-counts[t], t))
    return Vocabulary.from_words(kept)


def encode_text(vocab: Vocabulary, text: str) -> TokenSequence:
    """Encode raw text: BOS + one id per whitespace token, OOV mapped to UNK.

    No EOS is appended; end-of-sequence is a decoder concern.
    """
    ids = [vocab.bos_id]
    ids.extend(vocab.id_of(t) for t in tokenize(text))
    return TokenSequence(ids=tuple(ids), origin="corpus-target")


def decode_tokens(vocab: Vocabulary, seq: TokenSequence) -> str:
    """Render ids back to space-joined surface forms, dropping PAD/BOS/EOS."""
    hidden = (vocab.pad_id, vocab.bos_id, vocab.eos_id)
    return " ".join(vocab.token_of(i) for i in seq.ids if i not in hidden)
