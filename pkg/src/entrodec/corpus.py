"""Corpus ingestion: line documents, train/holdout splits, evaluation pairs."""

from __future__ import annotations

from .errors import CorpusEmptyError, InsufficientDataError
from .vocab import TokenSequence, Vocabulary, encode_text


def read_lines(path: str) -> list[str]:
    """Non-blank lines of a UTF-8 text file; one line is one document."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.strip() for line in fh]
    lines = [line for line in lines if line]
    if not lines:
        raise CorpusEmptyError(f"no documents in {path}")
    return lines


def split_corpus(lines: list[str], holdout_every: int = 10) -> tuple[list[str], list[str]]:
    """Deterministic split: every holdout_every-th document is held out."""
    train = [line for i, line in enumerate(lines) if i % holdout_every != 0]
    holdout = [line for i, line in enumerate(lines) if i % holdout_every == 0]
    return train, holdout


def make_eval_pairs(
    lines: list[str],
    encoder,
    prefix_len: int,
    target_len: int,
    limit: int | None = None,
) -> list[tuple[TokenSequence, TokenSequence]]:
    """Split documents into (prefix, target) token pairs for profiling/decoding.

    `encoder` is a Vocabulary or anything with an encode(text) method (a
    model provider). The prefix keeps the encoder's leading special token
    plus prefix_len more ids; the target is the next up-to-target_len ids.
    Documents too short for a non-empty target are skipped.
    """
    if isinstance(encoder, Vocabulary):
        encode = lambda line: encode_text(encoder, line)
    else:
        encode = encoder.encode
    pairs: list[tuple[TokenSequence, TokenSequence]] = []
    for line in lines:
        seq = encode(line)
        if len(seq) < 1 + prefix_len + 1:
            continue
        prefix = TokenSequence(ids=tuple(seq.ids[: 1 + prefix_len]), origin="corpus-target")
        target_ids = tuple(seq.ids[1 + prefix_len : 1 + prefix_len + target_len])
        pairs.append((prefix, TokenSequence(ids=target_ids, origin="corpus-target")))
        if limit is not None and len(pairs) >= limit:
            break
    if not pairs:
        raise InsufficientDataError(
            f"no documents with at least {prefix_len + 1} tokens"
        )
    return pairs
