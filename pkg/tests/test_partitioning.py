import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import bid
from shillcure.errors import ConsistencyError, DomainError
from shillcure.features import SBInstance, compute_instances
from shillcure.ingestion import preprocess
from shillcure.partitioning import (
    Subset,
    SubsetStats,
    compute_stats,
    duration_days,
    partition_by_days,
    partition_by_duration,
)
from shillcure.synthetic import SyntheticConfig, generate_synthetic


def inst(auction, *vec):
    vec = vec or (0.0,) * 8
    return SBInstance(auction, "b", *vec)


def test_grouping_by_duration():
    ds = preprocess([
        bid(auction="1", duration=86400),
        bid(auction="2", duration=86400),
        bid(auction="3", duration=604800),
    ])
    subsets = partition_by_duration([inst("1"), inst("2"), inst("3")], ds)
    assert {d: len(s.instances) for d, s in subsets.items()} == {1: 2, 7: 1}
    assert list(subsets) == [1, 7]
    assert subsets[7].label == "7d"


def test_five_day_seconds():
    assert duration_days(432000) == 5


def test_odd_duration_gets_own_subset():
    ds = preprocess([bid(auction="1", duration=2 * 86400), bid(auction="2", duration=86400 * 1.5)])
    subsets = partition_by_duration([inst("1"), inst("2")], ds)
    assert sorted(subsets) == [1.5, 2]


def test_unknown_auction():
    ds = preprocess([bid(auction="1")])
    with pytest.raises(ConsistencyError):
        partition_by_duration([inst("9")], ds)


def test_partition_by_days_lengths():
    with pytest.raises(ConsistencyError):
        partition_by_days([inst("1")], [])


def test_stats_identical_instances():
    v = (0.1, 0.2, 0.5, 0.4, 0.3, 1.0, 0.0, 0.7)
    st_ = compute_stats(Subset(1, [inst("1", *v), inst("2", *v)]))
    assert st_.per_feature_mean == pytest.approx(v)
    assert st_.per_feature_std == (0.0,) * 8


def test_stats_population_std():
    st_ = compute_stats(Subset(1, [inst("1", *([0.0] * 8)), inst("2", *([1.0] * 8))]))
    assert st_.per_feature_mean == (0.5,) * 8
    assert st_.per_feature_std == (0.5,) * 8
    assert st_.avg_means == 0.5 and st_.avg_stds == 0.5


def test_stats_row_average_of_published_means():
    means = (0.1455, 0.1273, 0.1149, 0.4678, 0.4348, 0.3533, 0.2567, 0.4801)
    st_ = SubsetStats.from_rows(means, (0.0,) * 8)
    assert st_.avg_means == pytest.approx(0.29755, abs=1e-12)
    assert abs(st_.avg_means - 0.2975) <= 5e-4


def test_stats_empty_subset():
    with pytest.raises(DomainError):
        compute_stats(Subset(1, []))


def test_from_rows_validation():
    with pytest.raises(DomainError):
        SubsetStats.from_rows([0.1] * 7, [0.1] * 8)
    with pytest.raises(DomainError):
        SubsetStats.from_rows([0.1] * 8, [-0.1] + [0.1] * 7)


vectors = st.lists(st.tuples(*[st.floats(0, 1)] * 8), min_size=1, max_size=40)


@settings(max_examples=100, deadline=None)
@given(vectors, st.randoms(use_true_random=False))
def test_stats_properties(rows, rnd):
    items = [inst(str(i), *v) for i, v in enumerate(rows)]
    base = compute_stats(Subset(1, items))
    assert abs(base.avg_means - sum(base.per_feature_mean) / 8) <= 1e-12
    assert all(s >= 0 for s in base.per_feature_std)
    shuffled = list(items)
    rnd.shuffle(shuffled)
    again = compute_stats(Subset(1, shuffled))
    assert np.allclose(again.per_feature_mean, base.per_feature_mean, atol=1e-12)
    assert np.allclose(again.per_feature_std, base.per_feature_std, atol=1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_partition_covers_generated_instances(seed):
    ds = generate_synthetic(SyntheticConfig(n_auctions=40), seed=seed)
    instances = compute_instances(ds)
    subsets = partition_by_duration(instances, ds)
    assert sum(len(s.instances) for s in subsets.values()) == len(instances)
    for days, s in subsets.items():
        for i in s.instances:
            assert ds.auction_index[i.auction_id].duration == days * 86400
