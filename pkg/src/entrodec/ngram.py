"""Trainable n-gram language model with interpolated Witten-Bell smoothing.

The conditional for a context of length m-1 interpolates the maximum
likelihood estimate with the (m-1)-order conditional:

    p_m(w | h) = (c(h, w) + T(h) * p_{m-1}(w | h')) / (c(h) + T(h))

where c(h) is the number of tokens observed after context h and T(h) the
number of distinct types. Unseen contexts pass straight through to the
shorter context; below the unigram sits a uniform floor over the whole
vocabulary, so every conditional probability is strictly positive.
"""

from __future__ import annotations

import hashlib
import io
import math
from collections import OrderedDict
from typing import Iterable, Sequence

import numpy as np

from .dist import ConditionalDistribution
from .errors import (
    CorpusEmptyError,
    FileFormatError,
    InvalidParameterError,
)
from .vocab import TokenSequence, Vocabulary, decode_tokens, encode_text, tokenize

MODEL_FORMAT_VERSION = "ECLM1"
SMOOTHING_WITTEN_BELL = "witten-bell"

MAX_ORDER = 6

# Bounded cache of log-probability vectors keyed by effective context.
DEFAULT_CACHE_SIZE = 8192


class NGramModel:
    """Witten-Bell smoothed n-gram model; immutable once trained.

    Implements the model-provider contract: vocab_info / next_distribution /
    encode / decode plus a stable content hash. next_distribution is a pure
    function of the context and returns bit-identical vectors for repeated
    queries.
    """

    def __init__(
        self,
        vocab: Vocabulary,
        order: int,
        tables: list[dict[tuple[int, ...], dict[int, int]]],
        smoothing: str = SMOOTHING_WITTEN_BELL,
    ) -> None:
        if not 1 <= order <= MAX_ORDER:
            raise InvalidParameterError(f"order must be in [1, {MAX_ORDER}], got {order}")
        if smoothing != SMOOTHING_WITTEN_BELL:
            raise InvalidParameterError(f"unknown smoothing {smoothing!r}")
        if len(tables) != order:
            raise InvalidParameterError("need one count table per order")
        self.vocab = vocab
        self.order = order
        self.smoothing = smoothing
        self._tables = tables
        self._totals = [
            {ctx: sum(c.values()) for ctx, c in table.items()} for table in tables
        ]
        self._unigram = self._dense_unigram()
        self._cache: OrderedDict[tuple[int, ...], np.ndarray] = OrderedDict()
        self.cache_size = DEFAULT_CACHE_SIZE
        self._hash: str | None = None

    # -- provider contract -------------------------------------------------

    def vocab_info(self) -> tuple[int, dict[str, int]]:
        v = self.vocab
        return v.size, {"pad": v.pad_id, "unk": v.unk_id, "bos": v.bos_id, "eos": v.eos_id}

    def encode(self, text: str) -> TokenSequence:
        return encode_text(self.vocab, text)

    def decode(self, seq: TokenSequence) -> str:
        return decode_tokens(self.vocab, seq)

    @property
    def model_hash(self) -> str:
        if self._hash is None:
            digest = hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()
            self._hash = digest[:16]
        return self._hash

    def next_distribution(self, context) -> ConditionalDistribution:
        """Full-support conditional over the vocabulary given `context` ids.

        Conditioning uses at most order-1 trailing tokens; shorter contexts
        are left-padded with BOS to match the training framing.
        """
        ids = tuple(context.ids if isinstance(context, TokenSequence) else context)
        key = self._effective_context(ids)
        logprobs = self._cache.get(key)
        if logprobs is None:
            logprobs = self._logprobs_for(key)
            self._cache[key] = logprobs
            if len(self._cache) > self.cache_size:
                self._cache.popitem(last=False)
        else:
            self._cache.move_to_end(key)
        return ConditionalDistribution(logprobs=logprobs, step=len(ids))

    # -- probability machinery ---------------------------------------------

    def _effective_context(self, ids: tuple[int, ...]) -> tuple[int, ...]:
        n = self.order - 1
        if n == 0:
            return ()
        if len(ids) >= n:
            return ids[-n:]
        return (self.vocab.bos_id,) * (n - len(ids)) + ids

    def _dense_unigram(self) -> np.ndarray:
        v = self.vocab.size
        counts = self._tables[0].get((), {})
        total = self._totals[0].get((), 0)
        types = len(counts)
        vec = np.full(v, types / v if types else 1.0, dtype=np.float64)
        for tok, c in counts.items():
            vec[tok] += c
        vec /= total + types if total + types else 1.0
        return vec

    def _logprobs_for(self, ctx: tuple[int, ...]) -> np.ndarray:
        p = self._unigram.copy()
        for m in range(2, self.order + 1):
            sub = ctx[len(ctx) - (m - 1) :]
            counts = self._tables[m - 1].get(sub)
            if not counts:
                continue
            total = self._totals[m - 1][sub]
            types = len(counts)
            denom = total + types
            p *= types / denom
            for tok, c in counts.items():
                p[tok] += c / denom
        p /= p.sum()
        logprobs = np.log(p)
        logprobs.flags.writeable = False
        return logprobs

    def sequence_nll(self, seq_ids: Sequence[int]) -> tuple[float, int]:
        """Total negative log-likelihood (nats) of a framed sequence and its length.

        The sequence is framed like training data: BOS padding on the left,
        EOS appended, scoring every token after the padding.
        """
        framed = self._frame(seq_ids)
        n_pad = self.order - 1
        nll = 0.0
        for i in range(n_pad, len(framed)):
            dist = self.next_distribution(framed[:i])
            nll += -float(dist.logprobs[framed[i]])
        return nll, len(framed) - n_pad

    def perplexity(self, lines: Iterable[str]) -> float:
        """exp(mean per-token NLL) over whitespace-tokenized lines."""
        total = 0.0
        count = 0
        for line in lines:
            toks = tokenize(line)
            if not toks:
                continue
            ids = [self.vocab.id_of(t) for t in toks]
            nll, n = self.sequence_nll(ids)
            total += nll
            count += n
        if count == 0:
            raise CorpusEmptyError("no tokens to evaluate perplexity on")
        return math.exp(total / count)

    def _frame(self, word_ids: Sequence[int]) -> tuple[int, ...]:
        pad = (self.vocab.bos_id,) * (self.order - 1)
        return pad + tuple(word_ids) + (self.vocab.eos_id,)

    # -- serialization -------------------------------------------------------

    def to_text(self) -> str:
        """Canonical plain-text serialization (deterministic byte-for-byte)."""
        out = io.StringIO()
        out.write(f"{MODEL_FORMAT_VERSION}\n")
        out.write(f"order {self.order}\n")
        out.write(f"smoothing {self.smoothing}\n")
        out.write(f"vocab {self.vocab.size}\n")
        for tok in self.vocab.tokens:
            out.write(tok + "\n")
        out.write("tables\n")
        for m, table in enumerate(self._tables, start=1):
            for ctx in sorted(table):
                counts = table[ctx]
                parts = [str(m), *map(str, ctx), ":"]
                for tok in sorted(counts):
                    parts.append(str(tok))
                    parts.append(str(counts[tok]))
                out.write(" ".join(parts) + "\n")
        out.write("end\n")
        return out.getvalue()

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())

    @staticmethod
    def from_text(text: str) -> "NGramModel":
        lines = text.split("\n")
        it = iter(lines)
        try:
            if next(it) != MODEL_FORMAT_VERSION:
                raise FileFormatError("not a model file (bad version header)")
            order = int(next(it).split()[1])
            smoothing = next(it).split()[1]
            v = int(next(it).split()[1])
            tokens = tuple(next(it) for _ in range(v))
            if next(it) != "tables":
                raise FileFormatError("missing tables section")
        except (StopIteration, IndexError, ValueError) as exc:
            raise FileFormatError(f"truncated or garbled model header: {exc}") from exc
        vocab = Vocabulary(tokens=tokens, ids={t: i for i, t in enumerate(tokens)})
        tables: list[dict[tuple[int, ...], dict[int, int]]] = [dict() for _ in range(order)]
        for line in it:
            if line == "end":
                break
            if not line:
                continue
            head, _, tail = line.partition(":")
            head_ids = head.split()
            m = int(head_ids[0])
            ctx = tuple(int(x) for x in head_ids[1:])
            nums = tail.split()
            counts = {int(nums[i]): int(nums[i + 1]) for i in range(0, len(nums), 2)}
            tables[m - 1][ctx] = counts
        else:
            raise FileFormatError("missing end marker")
        return NGramModel(vocab=vocab, order=order, tables=tables, smoothing=smoothing)

    @staticmethod
    def load(path: str) -> "NGramModel":
        with open(path, "r", encoding="utf-8") as fh:
            return NGramModel.from_text(fh.read())


def train_ngram(lines: Iterable[str], vocab: Vocabulary, order: int) -> NGramModel:
    """Count n-grams of every order up to `order` over BOS-framed, EOS-terminated lines."""
    if not 1 <= order <= MAX_ORDER:
        raise InvalidParameterError(f"order must be in [1, {MAX_ORDER}], got {order}")
    tables: list[dict[tuple[int, ...], dict[int, int]]] = [dict() for _ in range(order)]
    n_pad = order - 1
    pad = (vocab.bos_id,) * n_pad
    saw_tokens = False
    for line in lines:
        toks = tokenize(line)
        if not toks:
            continue
        saw_tokens = True
        seq = pad + tuple(vocab.id_of(t) for t in toks) + (vocab.eos_id,)
        for i in range(n_pad, len(seq)):
            target = seq[i]
            for m in range(1, order + 1):
                ctx = seq[i - (m - 1) : i]
                bucket = tables[m - 1].setdefault(ctx, {})
                bucket[target] = bucket.get(target, 0) + 1
    if not saw_tokens:
        raise CorpusEmptyError("corpus contains no tokens")
    return NGramModel(vocab=vocab, order=order, tables=tables)
