"""Contribution metrics: commit counting, line counting, change-size-cos."""
from __future__ import annotations

from datetime import datetime, timezone

import pytest
from hypothesis import given, strategies as st

from busfactor import (ChangeRecord, CommitMeta, DataMetric, MetricKind,
                       RawAuthor, contribution, cosine_change, locc,
                       token_distance, tokenize)


def make_record(added=0, deleted=0, added_tokens=None, deleted_tokens=None):
    meta = CommitMeta(hash="a" * 40, author=RawAuthor("A", "a@x"),
                      author_timestamp=datetime(2021, 6, 1,
                                                tzinfo=timezone.utc))
    return ChangeRecord(commit=meta, path="f", lines_added=added,
                        lines_deleted=deleted,
                        added_tokens=added_tokens or {},
                        deleted_tokens=deleted_tokens or {})


def test_tokenize_splits_on_non_alphanumerics():
    bag = tokenize(["x = f(y_val, 2)", "x += 1"])
    assert bag == {"x": 2, "f": 1, "y": 1, "val": 1, "2": 1, "1": 1}


def test_tokenize_counts_repeats():
    assert tokenize(["a a a b"]) == {"a": 3, "b": 1}


def test_tokenize_handles_unicode_words():
    assert tokenize(["naïve café"]) == {"naïve": 1, "café": 1}


def test_commits_metric_is_one_per_record():
    record = make_record(added=500, deleted=100)
    assert contribution(record, DataMetric(MetricKind.COMMITS)) == 1.0


def test_locc_sums_added_and_deleted():
    record = make_record(added=7, deleted=5)
    assert locc(record) == 12
    assert contribution(record, DataMetric(MetricKind.LOCC)) == 12.0


def test_cosine_orthogonal_changes_score_one():
    record = make_record(added=1, deleted=1,
                         added_tokens={"new": 1, "code": 1},
                         deleted_tokens={"old": 1, "stuff": 1})
    assert cosine_change(record) == 1.0


def test_cosine_identical_bags_score_zero():
    bag = {"same": 2, "thing": 1}
    record = make_record(added=1, deleted=1, added_tokens=bag,
                         deleted_tokens=dict(bag))
    assert cosine_change(record) == pytest.approx(0.0, abs=1e-12)


def test_cosine_pure_addition_scores_one():
    record = make_record(added=3, added_tokens={"fresh": 3})
    assert cosine_change(record) == 1.0


def test_cosine_pure_deletion_scores_one():
    record = make_record(deleted=3, deleted_tokens={"dead": 3})
    assert cosine_change(record) == 1.0


def test_cosine_both_bags_empty_scores_zero():
    # e.g. whitespace-only change: lines moved, no tokens at all
    record = make_record(added=1, deleted=1)
    assert cosine_change(record) == 0.0


def test_cosine_half_overlap():
    record = make_record(added=1, deleted=1,
                         added_tokens={"keep": 1, "new": 1},
                         deleted_tokens={"keep": 1, "old": 1})
    assert cosine_change(record) == pytest.approx(0.5)


def test_cos_scaled_by_locc():
    record = make_record(added=4, deleted=2,
                         added_tokens={"a": 1}, deleted_tokens={"b": 1})
    plain = contribution(record, DataMetric(MetricKind.CHANGE_SIZE_COS))
    scaled = contribution(record, DataMetric(MetricKind.CHANGE_SIZE_COS,
                                             cos_scale_by_locc=True))
    assert plain == 1.0
    assert scaled == 6.0


token_bags = st.dictionaries(
    st.text(alphabet="abcdefg", min_size=1, max_size=4),
    st.integers(min_value=1, max_value=9),
    max_size=6,
)


@given(added=token_bags, deleted=token_bags)
def test_token_distance_bounded_and_symmetric(added, deleted):
    d = token_distance(added, deleted)
    assert 0.0 <= d <= 1.0
    assert d == token_distance(deleted, added)


@given(bag=token_bags.filter(lambda b: b))
def test_token_distance_self_is_zero(bag):
    assert token_distance(bag, dict(bag)) == pytest.approx(0.0, abs=1e-12)


@given(bag=token_bags.filter(lambda b: b), scale=st.integers(2, 50))
def test_token_distance_scale_invariant(bag, scale):
    scaled = {tok: n * scale for tok, n in bag.items()}
    assert token_distance(bag, scaled) == pytest.approx(0.0, abs=1e-12)
