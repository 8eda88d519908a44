import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from propclust.baselines import (
    SeededRun,
    kmeans_centroid_objective,
    kmeans_pp,
    kmedoids,
    objective_cost,
    objective_kmeans,
    objective_kmedoids,
)
from propclust.metric import Clustering, metric_from_points

TWO_GROUPS = np.array([[0.0, 0.0]] * 6 + [[100.0, 0.0]] * 6)
LINE = metric_from_points([0, 1, 10, 11])


@pytest.mark.parametrize("algo", [kmeans_pp, kmedoids])
def test_k_equals_n(algo):
    rows = np.random.default_rng(0).normal(size=(7, 2))
    C = algo(rows, 7, SeededRun(1))
    assert all(len(c) == 1 for c in C.clusters)
    assert objective_kmeans(C, rows) == 0


@pytest.mark.parametrize("algo", [kmeans_pp, kmedoids])
@pytest.mark.parametrize("seed", range(10))
def test_separated_groups(algo, seed):
    C = algo(TWO_GROUPS, 2, SeededRun(seed))
    assert C.canonical() == (tuple(range(6)), tuple(range(6, 12)))


@pytest.mark.parametrize("algo", [kmeans_pp, kmedoids])
def test_single_cluster_and_bad_k(algo):
    rows = np.random.default_rng(0).normal(size=(5, 3))
    assert algo(rows, 1, SeededRun(0)).clusters == (frozenset(range(5)),)
    with pytest.raises(ValueError):
        algo(rows, 6, SeededRun(0))


def test_kmedoids_accepts_metric_and_duplicates():
    rows = np.array([[0.0], [0.0], [0.0], [5.0], [5.0]])
    C = kmedoids(metric_from_points(rows), 3, SeededRun(2))
    assert len(C.nonempty()) == 3


def test_kmeans_needs_finite_rows():
    with pytest.raises(ValueError):
        kmeans_pp(np.array([[0.0], [np.inf]]), 1, SeededRun(0))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(2, 20), st.integers(1, 5))
def test_seeded_runs_are_valid_and_deterministic(seed, n, k):
    k = min(k, n)
    rows = np.random.default_rng(seed).integers(0, 4, size=(n, 2)).astype(float)
    for algo in (kmeans_pp, kmedoids):
        a = algo(rows, k, SeededRun(seed))
        assert a.n == n and a.k == k
        assert a == algo(rows, k, SeededRun(seed))


def test_cost_examples():
    assert objective_cost(Clustering.from_sets([{0}, {1}, {2}, {3}]), LINE) == 0
    two = metric_from_points([0, 1])
    assert objective_cost(Clustering.from_sets([{0, 1}]), two) == 1.0
    assert objective_cost(Clustering.from_sets([{0, 1}, {2, 3}]), LINE) == 2.0


def test_kmeans_examples():
    rows = np.array([[0.0], [1.0]])
    C = Clustering.from_sets([{0, 1}])
    assert objective_kmeans(C, rows) == 1.0
    assert 2 * kmeans_centroid_objective(C, rows) == 1.0
    assert objective_kmeans(C, np.array([[0.0], [2.0]])) == 4.0
    assert objective_kmeans(C, metric_from_points([0, 2])) == 4.0
    assert objective_kmeans(Clustering.from_sets([{0}, {1}]), rows) == 0


def test_kmedoids_examples():
    assert objective_kmedoids(Clustering.from_sets([{0, 1, 2}]), metric_from_points([0, 1, 3])) == 3.0
    assert objective_kmedoids(Clustering.from_sets([{0, 1}]), metric_from_points([0, 10])) == 10.0
    assert objective_kmedoids(Clustering.from_sets([{0}, {1}]), metric_from_points([0, 10])) == 0


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_objective_identity_scaling_and_permutation(seed):
    rng = np.random.default_rng(seed)
    n, k = int(rng.integers(2, 12)), int(rng.integers(1, 4))
    rows = rng.normal(size=(n, int(rng.integers(1, 4))))
    C = Clustering.from_labels(rng.integers(0, k, size=n), k)
    km = objective_kmeans(C, rows)
    assert km == pytest.approx(2 * kmeans_centroid_objective(C, rows), rel=1e-9, abs=1e-12)
    m = metric_from_points(rows)
    c = 3.5
    ms = metric_from_points(rows * c)
    assert objective_cost(C, ms) == pytest.approx(c * objective_cost(C, m), rel=1e-9)
    assert objective_kmeans(C, rows * c) == pytest.approx(c * c * km, rel=1e-9)
    assert objective_kmedoids(C, ms) == pytest.approx(c * objective_kmedoids(C, m), rel=1e-9)
    perm = rng.permutation(n)
    Cp = Clustering.from_labels([C.assignment[p] for p in perm], k)
    mp = m.permuted(perm)
    assert objective_cost(Cp, mp) == pytest.approx(objective_cost(C, m), rel=1e-9)
    assert objective_kmedoids(Cp, mp) == pytest.approx(objective_kmedoids(C, m), rel=1e-9)
    assert objective_kmeans(Cp, rows[perm]) == pytest.approx(km, rel=1e-9)
