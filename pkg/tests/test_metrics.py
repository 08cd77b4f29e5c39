"""Quality metrics against brute-force references and the row aggregator."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from entrodec.decode import DecodeRequest, GenerationRecord, greedy_decode, stochastic_decode
from entrodec.errors import (
    AlignmentError,
    InvalidParameterError,
    UndefinedCorrelationError,
    ZeroLengthError,
)
from entrodec.metrics import (
    STOPWORDS,
    aggregate_records,
    f1_overlap,
    metric_rows_to_csv,
    ngram_repeat_count,
    pearson_correlation,
    repeat_score_at_5,
)
from entrodec.truncation import TruncationPolicy
from entrodec.vocab import TokenSequence, build_vocabulary

from helpers import flat_profile, oracle_ngram_repeats, oracle_repeat_score5


def seq(*ids):
    return TokenSequence(ids=tuple(ids))


# -- n-gram repeats ---------------------------------------------------------------


def test_ngram_repeat_examples():
    assert ngram_repeat_count(seq(1, 2, 1, 2, 1, 2), 3) == 2.0  # aba,bab,aba,bab
    assert ngram_repeat_count(seq(1, 2, 3, 4), 2) == 0.0
    assert ngram_repeat_count(seq(1, 2), 3) == 0.0
    with pytest.raises(InvalidParameterError):
        ngram_repeat_count(seq(1), 0)


def test_repeat_score_guard_and_worked_example():
    assert repeat_score_at_5(seq(1, 2, 3, 4, 5, 6)) == 0.0
    # five identical tokens: reps = [4,3,2,1,0]
    got = repeat_score_at_5(seq(9, 9, 9, 9, 9))
    want = math.log2((2 * 4 + 4 * 3 + 8 * 2 + 16 * 1) / 10) * 4 / 5
    assert got == pytest.approx(want, abs=1e-12)
    assert got == pytest.approx(1.903, abs=5e-4)
    with pytest.raises(ZeroLengthError):
        repeat_score_at_5(seq())


def test_repeat_score_matches_brute_force_on_random_sequences():
    rng = np.random.default_rng(29)
    for _ in range(300):
        n = int(rng.integers(1, 80))
        ids = tuple(int(x) for x in rng.integers(0, 8, size=n))
        assert repeat_score_at_5(seq(*ids)) == pytest.approx(
            oracle_repeat_score5(ids), abs=1e-12
        )


def test_repeat_kernels_agree():
    rng = np.random.default_rng(31)
    for _ in range(100):
        ids = tuple(int(x) for x in rng.integers(0, 5, size=int(rng.integers(1, 40))))
        for n in range(1, 6):
            assert ngram_repeat_count(seq(*ids), n) == oracle_ngram_repeats(ids, n)


@given(st.lists(st.integers(min_value=0, max_value=10_000), min_size=1, max_size=60, unique=True))
def test_repeat_score_zero_for_injective_sequences(ids):
    assert repeat_score_at_5(seq(*ids)) == 0.0


# -- F1 -----------------------------------------------------------------------------


def test_f1_examples():
    assert f1_overlap(seq(4, 5, 6), seq(4, 5, 6)) == 1.0
    assert f1_overlap(seq(4, 5), seq(6, 7)) == 0.0
    assert f1_overlap(seq(5, 6, 7), seq(4, 5, 6)) == pytest.approx(2 / 3)
    assert f1_overlap(seq(), seq(4)) == 0.0
    with pytest.raises(InvalidParameterError):
        f1_overlap(seq(4), seq())


def test_f1_symmetry():
    rng = np.random.default_rng(37)
    for _ in range(50):
        a = seq(*(int(x) for x in rng.integers(4, 30, size=12)))
        b = seq(*(int(x) for x in rng.integers(4, 30, size=9)))
        assert f1_overlap(a, b) == pytest.approx(f1_overlap(b, a), abs=1e-12)


def test_f1_duplicates_collapse():
    assert f1_overlap(seq(4, 4, 4, 5), seq(4, 5)) == 1.0


def test_f1_stopword_filtering():
    vocab = build_vocabulary(["the committee of the river"], min_count=1)
    the = vocab.ids["the"]
    of = vocab.ids["of"]
    committee = vocab.ids["committee"]
    river = vocab.ids["river"]
    gen = seq(the, of, committee)
    tgt = seq(the, river, committee)
    assert "the" in STOPWORDS and "of" in STOPWORDS
    # unfiltered: overlap {the, committee} of sets sized 3 and 3
    assert f1_overlap(gen, tgt, False, vocab) == pytest.approx(2 / 3)
    # filtered: {committee} vs {committee, river}
    filtered = f1_overlap(gen, tgt, True, vocab)
    p, r = 1.0, 0.5
    assert filtered == pytest.approx(2 * p * r / (p + r))
    with pytest.raises(InvalidParameterError):
        f1_overlap(gen, tgt, True, None)


def test_f1_ignores_special_tokens_with_vocab():
    vocab = build_vocabulary(["committee river"], min_count=1)
    gen = seq(vocab.bos_id, vocab.ids["committee"])
    tgt = seq(vocab.bos_id, vocab.ids["river"])
    assert f1_overlap(gen, tgt, False, vocab) == 0.0


# -- Pearson ---------------------------------------------------------------------


def test_pearson_exact_lines():
    xs = [1.0, 2.0, 3.0, 4.0]
    assert pearson_correlation(xs, [2 * x + 1 for x in xs]) == pytest.approx(1.0)
    assert pearson_correlation(xs, [-x for x in xs]) == pytest.approx(-1.0)


def test_pearson_matches_numpy():
    rng = np.random.default_rng(41)
    for _ in range(30):
        xs = rng.normal(size=50)
        ys = rng.normal(size=50)
        want = float(np.corrcoef(xs, ys)[0, 1])
        assert pearson_correlation(list(xs), list(ys)) == pytest.approx(want, abs=1e-12)


def test_pearson_affine_invariance():
    rng = np.random.default_rng(43)
    xs = list(rng.normal(size=20))
    ys = list(rng.normal(size=20))
    base = pearson_correlation(xs, ys)
    assert pearson_correlation([3 * x + 7 for x in xs], ys) == pytest.approx(base, abs=1e-10)
    assert pearson_correlation([-2 * x for x in xs], ys) == pytest.approx(-base, abs=1e-10)


def test_pearson_errors():
    with pytest.raises(InvalidParameterError):
        pearson_correlation([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(InvalidParameterError):
        pearson_correlation([1.0, 2.0, 3.0], [1.0, 2.0])
    with pytest.raises(UndefinedCorrelationError):
        pearson_correlation([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])


# -- aggregation ------------------------------------------------------------------


def _record(tokens, entropies, decoder="greedy", backoffs=0):
    n = len(tokens)
    return GenerationRecord(
        tokens=seq(*tokens),
        entropies=list(entropies),
        surprisals=[0.5] * n,
        greedy_flags=[True] * n,
        seed=0,
        decoder=decoder,
        backoff_count=backoffs,
    )


def test_aggregate_identical_record_scores_one():
    prof = flat_profile(mu=2.0, sigma=0.5, horizon=10, window=1)
    rec = _record([4, 5, 6], [2.0, 2.0, 2.0])
    row = aggregate_records([rec], [seq(4, 5, 6)], prof, 1.5, mode="dialog", config_id="x")
    assert row.f1 == 1.0
    assert row.evr == 0.0
    assert row.det_pct == 100.0


def test_aggregate_two_records_average():
    prof = flat_profile(mu=2.0, sigma=0.5, horizon=10, window=1)
    r1 = _record([4, 5, 6], [2.0, 2.0, 2.0])
    r2 = _record([7, 8], [9.0, 9.0])
    t1, t2 = seq(4, 5, 6), seq(9, 9)
    single1 = aggregate_records([r1], [t1], prof, 1.5, mode="dialog")
    single2 = aggregate_records([r2], [t2], prof, 1.5, mode="dialog")
    both = aggregate_records([r1, r2], [t1, t2], prof, 1.5, mode="dialog")
    assert both.f1 == pytest.approx((single1.f1 + single2.f1) / 2)
    assert both.evr == pytest.approx((single1.evr + single2.evr) / 2)
    assert both.euvr == pytest.approx((single1.euvr + single2.euvr) / 2)


def test_aggregate_permutation_invariant():
    prof = flat_profile(mu=2.0, sigma=0.5, horizon=10, window=1)
    recs = [_record([4, 5], [2.0, 2.0]), _record([6, 7], [9.0, 9.0]), _record([8], [2.0])]
    tgts = [seq(4, 5), seq(6, 7), seq(8)]
    fwd = aggregate_records(recs, tgts, prof, 1.5, mode="dialog")
    rev = aggregate_records(recs[::-1], tgts[::-1], prof, 1.5, mode="dialog")
    assert fwd == rev


def test_aggregate_det_pct_reporting_convention(fixture_model, fixture_profile, fixture_pairs):
    prefix, target = fixture_pairs[0]
    req = DecodeRequest(provider=fixture_model, prefix=prefix, max_len=24, seed=5)
    greedy = greedy_decode(req)
    sampled = stochastic_decode(req, TruncationPolicy(kind="top_k", k=30))
    prof = fixture_profile
    row_g = aggregate_records([greedy], [target], prof, 1.5, vocab=fixture_model.vocab)
    row_s = aggregate_records([sampled], [target], prof, 1.5, vocab=fixture_model.vocab)
    assert row_g.det_pct == 100.0
    assert row_s.det_pct == 0.0  # reporting convention even if draws hit the argmax
    assert 0.0 <= sampled.det_fraction <= 1.0  # the true fraction stays on the record


def test_aggregate_alignment_error():
    prof = flat_profile(mu=2.0, sigma=0.5, horizon=4, window=1)
    with pytest.raises(AlignmentError):
        aggregate_records([_record([4], [2.0])], [], prof, 1.5, mode="dialog")


def test_aggregate_empty_generation_contributes_zeros():
    prof = flat_profile(mu=2.0, sigma=0.5, horizon=4, window=1)
    empty = _record([], [])
    row = aggregate_records([empty], [seq(4)], prof, 1.5, mode="dialog")
    assert row.f1 == 0.0 and row.evr == 0.0 and row.repeat_score5 == 0.0


def test_metric_csv_shape():
    prof = flat_profile(mu=2.0, sigma=0.5, horizon=4, window=1)
    row = aggregate_records([_record([4, 5], [2.0, 2.0])], [seq(4, 5)], prof, 1.5, mode="dialog", config_id="g")
    text = metric_rows_to_csv([row])
    header, line = text.strip().split("\n")
    assert header.startswith("config_id,f1,repeat_score5")
    assert line.startswith("g,1.000000,")
    assert len(line.split(",")) == len(header.split(","))
