import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from flexinvest.clustering import cluster_representatives, standardize_blocks
from flexinvest.errors import EmptySeries, KExceedsN
from oracles import exact_kmedoids


def test_identical_vectors_single_cluster():
    X = np.tile([1.0, 2.0, 3.0], (4, 1))
    res = cluster_representatives(X, 1)
    assert len(res.medoids) == 1
    assert res.weights.tolist() == [1.0]
    assert res.cost == 0.0


def test_two_clouds_match_exact_kmedoids():
    rng = np.random.default_rng(5)
    X = np.vstack([rng.normal(0, 0.3, (6, 3)), rng.normal(5, 0.3, (6, 3))])
    res = cluster_representatives(X, 2, seed=1)
    best_cost, best_med = exact_kmedoids(X, 2)
    assert res.cost == pytest.approx(best_cost, rel=1e-12)
    assert tuple(res.medoids) == best_med
    assert res.weights.tolist() == [0.5, 0.5]
    assert set(res.assignments[:6]) != set(res.assignments[6:])


def test_k_equals_n():
    X = np.arange(10.0).reshape(5, 2)
    res = cluster_representatives(X, 5)
    assert res.medoids.tolist() == [0, 1, 2, 3, 4]
    assert np.allclose(res.weights, 0.2)


def test_errors():
    with pytest.raises(EmptySeries):
        cluster_representatives(np.empty((0, 3)), 1)
    with pytest.raises(KExceedsN):
        cluster_representatives(np.ones((2, 3)), 3)


def test_standardize_blocks_scales_each_block():
    a = np.array([[0.0, 2.0], [2.0, 0.0]])
    b = np.array([[10.0], [30.0]])
    out = standardize_blocks([a, b])
    assert out.shape == (2, 3)
    assert out[:, :2].std() == pytest.approx(1.0)
    assert out[:, 2].std() == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(arrays(float, st.tuples(st.integers(2, 8), st.integers(1, 4)), elements=st.floats(-10, 10)),
       st.integers(0, 100), st.data())
def test_deterministic_and_normalized(X, seed, data):
    k = data.draw(st.integers(1, X.shape[0]))
    a = cluster_representatives(X, k, seed)
    b = cluster_representatives(X, k, seed)
    assert np.array_equal(a.medoids, b.medoids) and np.array_equal(a.assignments, b.assignments)
    assert abs(a.weights.sum() - 1.0) <= 1e-12
    assert len(set(a.medoids.tolist())) == k
    # every point is assigned to a nearest medoid
    D = ((X[:, None, :] - X[a.medoids][None, :, :]) ** 2).sum(-1)
    assert np.allclose(D[np.arange(len(X)), a.assignments], D.min(axis=1))


@settings(max_examples=25, deadline=None)
@given(arrays(float, st.tuples(st.integers(3, 7), st.just(2)), elements=st.floats(-5, 5)), st.integers(1, 3))
def test_never_worse_than_brute_force_by_much(X, k):
    # PAM swaps reach a local optimum; on tiny sets it should be the global one or close
    k = min(k, len(X))
    res = cluster_representatives(X, k, seed=0)
    best_cost, _ = exact_kmedoids(X, k)
    assert res.cost >= best_cost - 1e-9
