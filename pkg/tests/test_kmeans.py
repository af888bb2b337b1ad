import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_two_partition, partition_of
from shillcure.errors import DomainError
from shillcure.kmeans import kmeans
from shillcure.synthetic import make_blobs


def test_single_cluster():
    rng = np.random.default_rng(0)
    x = rng.random((30, 8))
    r = kmeans(x, 1)
    assert (r.labels == 0).all()
    assert np.allclose(r.centroids[0], x.mean(axis=0))
    assert r.sse == pytest.approx(x.var(axis=0).sum() * len(x))


def test_one_cluster_per_point():
    x = np.random.default_rng(1).random((9, 8))
    r = kmeans(x, 9)
    assert len(set(r.labels.tolist())) == 9
    assert r.sse == pytest.approx(0.0, abs=1e-12)


def test_two_pairs_far_apart():
    x = np.array([[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]])
    r = kmeans(x, 2)
    sse, best = brute_two_partition(x.tolist())
    assert partition_of(r.labels) == best == {frozenset({0, 1}), frozenset({2, 3})}
    assert r.sse == pytest.approx(sse)


@pytest.mark.parametrize("seed", range(25))
def test_matches_brute_force_on_small_blobs(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 13))
    x, _ = make_blobs(n, 2, 0.15, 0.5, dim=int(rng.integers(1, 9)), seed=seed)
    sse, best = brute_two_partition(x.tolist())
    r = kmeans(x, 2, seed=seed)
    assert partition_of(r.labels) == best
    assert r.sse == pytest.approx(sse, rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(3, 10))
def test_never_beats_brute_force(seed, n):
    x = np.random.default_rng(seed).random((n, 3))
    sse, _ = brute_two_partition(x.tolist())
    assert kmeans(x, 2, seed=seed).sse >= sse - 1e-9


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 6), st.integers(6, 60))
def test_properties(seed, k, n):
    x = np.random.default_rng(seed).random((n, 8))
    r = kmeans(x, k, seed=seed, n_init=2)
    hist = np.asarray(r.sse_history)
    assert (np.diff(hist) <= np.abs(hist[:-1]) * 1e-9 + 1e-12).all()
    d = ((x[:, None, :] - r.centroids[None, :, :]) ** 2).sum(axis=2)
    # each point sits with its nearest centroid
    assert np.allclose(d[np.arange(n), r.labels], d.min(axis=1))
    assert r.sse >= 0
    assert set(r.labels.tolist()) <= set(range(k))
    again = kmeans(x, k, seed=seed, n_init=2)
    assert np.array_equal(again.labels, r.labels) and again.sse == r.sse


def test_ties_go_to_lowest_centroid():
    x = np.array([[0.0], [1.0], [2.0]])
    r = kmeans(x, 2, seed=3)
    d = np.abs(x - r.centroids.T)
    for i in range(3):
        assert r.labels[i] == int(np.flatnonzero(d[i] == d[i].min())[0])


def test_duplicates_and_errors():
    x = np.array([[0.0, 0.0]] * 5 + [[1.0, 1.0]] * 5)
    r = kmeans(x, 2)
    assert partition_of(r.labels) == {frozenset(range(5)), frozenset(range(5, 10))}
    with pytest.raises(DomainError):
        kmeans(x, 3)
    with pytest.raises(DomainError):
        kmeans(np.empty((0, 8)), 1)
    with pytest.raises(DomainError):
        kmeans(x, 0)
