"""Session-wide fixtures: toy corpora, the synthetic fixture corpus, trained models."""

from __future__ import annotations

import pytest

from entrodec.corpus import make_eval_pairs, split_corpus
from entrodec.fixture import build_fixture_lines, write_fixture_corpus
from entrodec.ngram import train_ngram
from entrodec.profile import estimate_profile
from entrodec.vocab import build_vocabulary

# Small enough to train in ~1 s, large enough for the phenomena to show.
FIXTURE_LINES = 1200


@pytest.fixture(scope="session")
def toy_corpus() -> list[str]:
    return ["a b", "a b", "a c"]


@pytest.fixture(scope="session")
def toy_vocab(toy_corpus):
    return build_vocabulary(toy_corpus, min_count=1)


@pytest.fixture(scope="session")
def toy_bigram(toy_corpus, toy_vocab):
    return train_ngram(toy_corpus, toy_vocab, order=2)


@pytest.fixture(scope="session")
def fixture_lines() -> list[str]:
    return build_fixture_lines(n_lines=FIXTURE_LINES)


@pytest.fixture(scope="session")
def fixture_split(fixture_lines):
    return split_corpus(fixture_lines)


@pytest.fixture(scope="session")
def fixture_vocab(fixture_split):
    train_lines, _ = fixture_split
    return build_vocabulary(train_lines, min_count=2)


@pytest.fixture(scope="session")
def fixture_model(fixture_split, fixture_vocab):
    train_lines, _ = fixture_split
    return train_ngram(train_lines, fixture_vocab, order=4)


@pytest.fixture(scope="session")
def fixture_pairs(fixture_split, fixture_vocab):
    _, holdout = fixture_split
    return make_eval_pairs(holdout, fixture_vocab, prefix_len=32, target_len=65, limit=120)


@pytest.fixture(scope="session")
def fixture_profile(fixture_model, fixture_pairs):
    return estimate_profile(fixture_model, fixture_pairs, window=5, horizon=64)


@pytest.fixture(scope="session")
def fixture_corpus_path(tmp_path_factory) -> str:
    path = tmp_path_factory.mktemp("corpus") / "fixture.txt"
    return write_fixture_corpus(str(path), n_lines=FIXTURE_LINES)
