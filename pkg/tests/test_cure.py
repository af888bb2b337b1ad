import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from shillcure.cure import (
    CureCluster,
    CureParams,
    cluster_distance,
    cure_cluster,
    labels_from_clusters,
    select_representatives,
    shrink_reps,
)
from shillcure.errors import DomainError


def pad(*coords, dim=8):
    return np.array(list(coords) + [0.0] * (dim - len(coords)))


def single(p):
    p = np.atleast_2d(p)
    return CureCluster(np.array([0]), p[0], p, p)


def test_shrink():
    p = np.random.default_rng(0).random((4, 8))
    c = p.mean(axis=0)
    assert np.array_equal(shrink_reps(p, c, 0.0), p)
    assert np.array_equal(shrink_reps(p, c, 1.0), np.tile(c, (4, 1)))
    assert np.allclose(shrink_reps(np.zeros((1, 8)), np.ones(8), 0.5), 0.5)


def test_select_single_member_and_saturation():
    m = np.random.default_rng(1).random((3, 8))
    assert np.array_equal(select_representatives(m[:1], m[0], 4), m[:1])
    got = select_representatives(m, m.mean(axis=0), 5)
    assert sorted(map(tuple, got)) == sorted(map(tuple, m))


def test_select_square_corners():
    sq = np.array([pad(0, 0), pad(1, 0), pad(1, 1), pad(0, 1)])
    got = select_representatives(sq, sq.mean(axis=0), 2)
    best = max(np.linalg.norm(a - b) for a, b in itertools.combinations(sq, 2))
    assert np.linalg.norm(got[0] - got[1]) == pytest.approx(best)
    # ties go to the lowest row: corner 0 first, then its opposite
    assert np.array_equal(got, sq[[0, 2]])


def test_select_is_farthest_point_traversal():
    m = np.random.default_rng(2).random((15, 8))
    c = m.mean(axis=0)
    got = select_representatives(m, c, 4)
    assert np.array_equal(got[0], m[np.argmax(np.linalg.norm(m - c, axis=1))])
    for j in range(1, 4):
        mind = np.min([np.linalg.norm(m - g, axis=1) for g in got[:j]], axis=0)
        assert np.min(np.linalg.norm(got[:j] - got[j], axis=1)) == pytest.approx(mind.max())


def test_distance_examples():
    assert cluster_distance(single(pad(1, 2)), single(pad(1, 2))) == 0.0
    assert cluster_distance(single(pad(0, 0)), single(pad(3, 4))) == 5.0


def test_distance_is_single_link_at_alpha_zero():
    rng = np.random.default_rng(3)
    a, b = rng.random((3, 8)), rng.random((3, 8)) + 0.5

    def cl(m):
        c = m.mean(axis=0)
        s = select_representatives(m, c, 3)
        return CureCluster(np.arange(3), c, shrink_reps(s, c, 0.0), s)

    brute = min(np.linalg.norm(p - q) for p in a for q in b)
    assert cluster_distance(cl(a), cl(b)) == pytest.approx(brute)


def test_target_equals_n():
    x = np.random.default_rng(4).random((7, 8))
    out = cure_cluster(x, CureParams(target_k=7))
    assert [c.members.tolist() for c in out] == [[i] for i in range(7)]


def test_collinear_pairs():
    x = np.array([pad(v) for v in (0, 0.1, 5, 5.1)])
    out = cure_cluster(x, CureParams(num_reps=2, alpha=0.2, target_k=2))
    assert [c.members.tolist() for c in out] == [[0, 1], [2, 3]]


@pytest.mark.parametrize("seed", range(30))
def test_centroid_linkage_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 13))
    x = rng.random((n, 8))
    k = int(rng.integers(1, n + 1))
    out = cure_cluster(x, CureParams(num_reps=1, alpha=1.0, target_k=k))
    assert {frozenset(c.members.tolist()) for c in out} == oracles.centroid_linkage(x.tolist(), k)


@pytest.mark.parametrize("seed", range(30))
def test_naive_cure_oracle(seed):
    rng = np.random.default_rng(100 + seed)
    n = int(rng.integers(2, 25))
    x = rng.random((n, int(rng.integers(1, 9))))
    reps = int(rng.integers(1, 6))
    alpha = float(rng.choice([0.0, 0.05, 0.3, 0.7, 1.0]))
    k = int(rng.integers(1, n + 1))
    out = cure_cluster(x, CureParams(num_reps=reps, alpha=alpha, target_k=k))
    assert {frozenset(c.members.tolist()) for c in out} == oracles.naive_cure(x.tolist(), reps, alpha, k)


def check_clusters(x, out, params):
    n = len(x)
    members = np.concatenate([c.members for c in out])
    assert sorted(members.tolist()) == list(range(n))
    assert len(out) == params.target_k
    for c in out:
        assert np.allclose(c.centroid, x[c.members].mean(axis=0), atol=1e-9)
        assert len(c.reps) == min(params.num_reps, c.size)
        assert np.allclose(c.reps, shrink_reps(c.scattered, c.centroid, params.alpha), atol=1e-12)
        # scattered points are members
        member_rows = {tuple(r) for r in x[c.members]}
        assert all(tuple(s) in member_rows for s in c.scattered)
    assert [int(c.members[0]) for c in out] == sorted(int(c.members[0]) for c in out)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 60), st.integers(1, 8),
       st.floats(0, 1), st.data())
def test_invariants(seed, n, reps, alpha, data):
    x = np.round(np.random.default_rng(seed).random((n, 8)), 2)
    k = data.draw(st.integers(1, n))
    params = CureParams(num_reps=reps, alpha=alpha, target_k=k)
    out = cure_cluster(x, params)
    check_clusters(x, out, params)
    again = cure_cluster(x, params)
    assert [c.members.tolist() for c in again] == [c.members.tolist() for c in out]


@pytest.mark.parametrize("fraction,outliers", [(0.5, False), (1.0, True), (0.4, True)])
def test_sampling_and_outliers_still_cover(fraction, outliers):
    rng = np.random.default_rng(8)
    x = np.vstack([rng.normal(0, 0.05, (40, 8)), rng.normal(1, 0.05, (40, 8)), rng.random((4, 8)) * 3])
    params = CureParams(num_reps=4, alpha=0.2, target_k=2, sample_fraction=fraction,
                        outlier_elimination=outliers, outlier_min_size=3)
    out = cure_cluster(x, params, seed=5)
    check_clusters(x, out, params)
    labels = labels_from_clusters(out, len(x))
    assert len(set(labels[:40])) == 1 and len(set(labels[40:80])) == 1
    assert labels[0] != labels[40]
    again = cure_cluster(x, params, seed=5)
    assert np.array_equal(labels_from_clusters(again, len(x)), labels)


def test_errors():
    with pytest.raises(DomainError):
        cure_cluster(np.zeros((3, 8)), CureParams(target_k=4))
    with pytest.raises(DomainError):
        cure_cluster(np.zeros((0, 8)), CureParams(target_k=1))
    for bad in (dict(num_reps=0), dict(alpha=1.5), dict(target_k=0), dict(sample_fraction=0.0)):
        with pytest.raises(DomainError):
            CureParams(**bad)
    with pytest.raises(DomainError):
        select_representatives(np.empty((0, 8)), np.zeros(8), 2)


def test_coincident_points():
    x = np.zeros((6, 8))
    out = cure_cluster(x, CureParams(target_k=2))
    # every distance ties at 0, so merges always take the lowest pair
    assert [c.members.tolist() for c in out] == [[0, 1, 2, 3, 4], [5]]
