"""Vocabulary construction, encoding, and round-trip behavior."""

import pytest
from hypothesis import given, strategies as st

from entrodec.errors import CorpusEmptyError, InvalidIdError, InvalidParameterError
from entrodec.fixture import build_fixture_lines
from entrodec.vocab import (
    SPECIAL_TOKENS,
    TokenSequence,
    UNK,
    build_vocabulary,
    decode_tokens,
    encode_text,
)


def test_min_count_excludes_rare_tokens():
    vocab = build_vocabulary(["a a b"], min_count=2)
    assert "a" in vocab.ids
    assert "b" not in vocab.ids
    assert vocab.size == len(SPECIAL_TOKENS) + 1


def test_min_count_one_keeps_everything():
    vocab = build_vocabulary(["a a b"], min_count=1)
    assert "a" in vocab.ids and "b" in vocab.ids


def test_specials_always_present_and_distinct():
    vocab = build_vocabulary(["x"], min_count=1)
    ids = {vocab.pad_id, vocab.unk_id, vocab.bos_id, vocab.eos_id}
    assert len(ids) == 4
    assert all(i < vocab.size for i in ids)


def test_ids_dense_and_bijective():
    vocab = build_vocabulary(["c b a a b c c"], min_count=1)
    assert sorted(vocab.ids.values()) == list(range(vocab.size))
    for tok, i in vocab.ids.items():
        assert vocab.token_of(i) == tok


def test_deterministic_ordering_frequency_then_lex():
    vocab = build_vocabulary(["b b a a c"], min_count=1)
    regular = vocab.tokens[len(SPECIAL_TOKENS) :]
    assert regular == ("a", "b", "c")  # a/b tie on count 2, lex break; c last


def test_empty_corpus_rejected():
    with pytest.raises(CorpusEmptyError):
        build_vocabulary([], min_count=1)
    with pytest.raises(CorpusEmptyError):
        build_vocabulary(["   ", ""], min_count=1)


def test_bad_min_count_rejected():
    with pytest.raises(InvalidParameterError):
        build_vocabulary(["a"], min_count=0)


def test_encode_lowercases_and_prepends_bos():
    vocab = build_vocabulary(["a b"], min_count=1)
    seq = encode_text(vocab, "A b")
    assert seq.ids == (vocab.bos_id, vocab.ids["a"], vocab.ids["b"])


def test_encode_maps_oov_to_unk():
    vocab = build_vocabulary(["a"], min_count=1)
    seq = encode_text(vocab, "a zzz")
    assert seq.ids == (vocab.bos_id, vocab.ids["a"], vocab.unk_id)


def test_decode_omits_specials():
    vocab = build_vocabulary(["a b"], min_count=1)
    seq = TokenSequence(ids=(vocab.bos_id, vocab.ids["a"], vocab.ids["b"], vocab.eos_id))
    assert decode_tokens(vocab, seq) == "a b"
    assert decode_tokens(vocab, TokenSequence(ids=(vocab.bos_id,))) == ""


def test_decode_rejects_out_of_range_id():
    vocab = build_vocabulary(["a"], min_count=1)
    with pytest.raises(InvalidIdError):
        decode_tokens(vocab, TokenSequence(ids=(vocab.size,)))


def test_vocab_size_matches_independent_frequency_count():
    # Independent oracle: plain dict counting over the same whitespace split.
    lines = build_fixture_lines(n_lines=150)
    counts: dict[str, int] = {}
    for line in lines:
        for tok in line.lower().split():
            counts[tok] = counts.get(tok, 0) + 1
    expected = sum(1 for c in counts.values() if c >= 2)
    vocab = build_vocabulary(lines, min_count=2)
    assert vocab.size == expected + len(SPECIAL_TOKENS)


def test_round_trip_on_fixture_lines():
    lines = build_fixture_lines(n_lines=120)
    vocab = build_vocabulary(lines[:100], min_count=2)
    for line in lines[:100]:
        decoded = decode_tokens(vocab, encode_text(vocab, line))
        expected = " ".join(
            tok if tok in vocab.ids else UNK for tok in line.lower().split()
        )
        assert decoded == expected


@given(st.text(alphabet="abcxyz \t", max_size=60))
def test_encode_total_function(text):
    vocab = build_vocabulary(["a b c"], min_count=1)
    seq = encode_text(vocab, text)
    assert seq.ids[0] == vocab.bos_id
    assert all(0 <= i < vocab.size for i in seq.ids)
