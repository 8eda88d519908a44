import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _instances import small_instances
from propclust.metric import (
    INF,
    Clustering,
    LossKind,
    LossModel,
    MetricError,
    MetricInstance,
    ModelIncompleteError,
    ProblemSpec,
    cluster_losses,
    loss,
    mask_of,
    members_of,
    metric_from_points,
    metric_from_positions,
    ratio,
    validate_metric,
)

LINE = metric_from_points([0, 1, 10, 11])


def test_max_loss_of_singleton_is_zero():
    assert loss(LossModel.maximum(LINE), 2, {2}) == 0.0


def test_average_loss_line_examples():
    avg = LossModel.average(LINE)
    assert loss(avg, 0, {0, 1}) == 0.5
    assert loss(avg, 0, {0, 2}) == 5.0


def test_average_divides_by_full_size():
    # the self term counts: (0 + 1 + 10) / 3
    assert loss(LossModel.average(LINE), 0, {0, 1, 2}) == pytest.approx(11 / 3)


def test_loss_requires_membership():
    with pytest.raises(ValueError):
        loss(LossModel.average(LINE), 0, {1, 2})


def test_arbitrary_lookup_and_miss():
    model = LossModel.arbitrary(2, {(0, 0b01): 0.0, (0, 0b11): 2.5, (1, 0b11): 1.0})
    assert loss(model, 0, {0, 1}) == 2.5
    with pytest.raises(ModelIncompleteError):
        loss(model, 1, {1})
    assert model.missing_entries() == [(1, 0b10)]


def test_arbitrary_cap():
    with pytest.raises(MetricError):
        LossModel.arbitrary(25, {})


def test_validate_zero_matrix():
    assert validate_metric(MetricInstance(np.zeros((3, 3)))) == []


def test_validate_reports_asymmetry():
    d = np.zeros((3, 3))
    d[0, 1], d[1, 0] = 1, 2
    out = validate_metric(MetricInstance(d))
    assert any("symmetry" in v and "(0,1)" in v for v in out)


def test_validate_line_metric():
    assert validate_metric(metric_from_points([0, 1, 3])) == []


def test_validate_reports_triangle_and_identity():
    d = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], dtype=float)
    assert any(v.startswith("triangle violation (0,2,1)") for v in validate_metric(MetricInstance(d)))
    d = np.array([[1.0, 0.0], [0.0, 0.0]])
    assert any("identity" in v for v in validate_metric(MetricInstance(d)))


def test_inf_distances_pass_validation():
    d = np.array([[0, 1, INF], [1, 0, INF], [INF, INF, 0]])
    assert validate_metric(MetricInstance(d)) == []


def test_metric_from_points_examples():
    assert metric_from_points([[1.0, 2.0], [1.0, 2.0]]).dist.tolist() == [[0, 0], [0, 0]]
    m = metric_from_points([[0], [3], [4]])
    assert m.dist[0, 2] == 4 and m.positions == (0.0, 3.0, 4.0)
    assert metric_from_points([[0, 0], [3, 4]]).dist[0, 1] == 5


def test_metric_from_points_dimension_mismatch():
    with pytest.raises(MetricError):
        metric_from_points([[0, 1], [2]])


def test_detached_positions():
    m = metric_from_positions([0.0, INF, -INF, INF])
    assert m.dist[0, 1] == INF and m.dist[1, 2] == INF and m.dist[1, 3] == INF
    assert m.dist[1, 1] == 0
    assert validate_metric(m) == []


def test_ratio_conventions():
    assert ratio(0, 0) == 1
    assert ratio(3, 0) == INF
    assert ratio(INF, INF) == 1
    assert ratio(2, INF) == 0
    assert ratio(INF, 2) == INF
    assert ratio(3, 2) == 1.5


def test_masks_round_trip():
    assert mask_of({0, 3}) == 0b1001
    assert members_of(0b1001) == {0, 3}


def test_problem_spec_tau():
    assert ProblemSpec(10, 3).tau == 4
    assert ProblemSpec(9, 3).tau == 3
    with pytest.raises(ValueError):
        ProblemSpec(3, 4)


def test_clustering_validation_and_lookup():
    C = Clustering.from_sets([{2, 0}, {1}], k=3)
    assert C.k == 3 and C.n == 3
    assert C.cluster_of(0) == {0, 2}
    assert C.clusters[2] == frozenset()
    with pytest.raises(ValueError):
        Clustering((frozenset({0, 1}), frozenset({1})))
    with pytest.raises(ValueError):
        Clustering((frozenset({0, 2}),))  # agent 1 missing
    with pytest.raises(ValueError):
        Clustering.from_sets([{0}, {1}, {2}], k=2)


def test_clustering_from_labels():
    C = Clustering.from_labels([1, 1, 0], k=3)
    assert C.clusters == (frozenset({2}), frozenset({0, 1}), frozenset())
    assert C.canonical() == ((0, 1), (2,))


def test_metric_is_read_only():
    with pytest.raises(ValueError):
        LINE.dist[0, 1] = 3.0


def test_rejects_negative_or_nan():
    with pytest.raises(MetricError):
        MetricInstance(np.array([[0, -1], [-1, 0]]))
    with pytest.raises(MetricError):
        MetricInstance(np.array([[0, math.nan], [math.nan, 0]]))


def test_average_not_monotone_both_directions():
    m = metric_from_points([0, 1, 4])
    avg = LossModel.average(m)
    # agent 0 pays 2 on {0,2}, 5/3 on {0,1,2} and 1/2 on {0,1}
    assert loss(avg, 0, {0, 2}) > loss(avg, 0, {0, 1, 2})
    assert loss(avg, 0, {0, 1}) < loss(avg, 0, {0, 1, 2})


@settings(max_examples=60, deadline=None)
@given(small_instances(min_n=2, max_n=7), st.data())
def test_max_dominates_average(inst, data):
    model, _ = inst
    n = model.n
    S = data.draw(st.sets(st.integers(0, n - 1), min_size=1))
    i = data.draw(st.sampled_from(sorted(S)))
    mx = loss(model.with_kind(LossKind.MAXIMUM), i, S)
    av = loss(model.with_kind(LossKind.AVERAGE), i, S)
    assert mx >= av >= 0


@settings(max_examples=60, deadline=None)
@given(small_instances(min_n=2, max_n=7), st.data())
def test_max_loss_superset_monotone(inst, data):
    model, _ = inst
    model = model.with_kind(LossKind.MAXIMUM)
    n = model.n
    S = data.draw(st.sets(st.integers(0, n - 1), min_size=1))
    T = S | data.draw(st.sets(st.integers(0, n - 1)))
    i = min(S)
    assert loss(model, i, S) <= loss(model, i, T)


@settings(max_examples=60, deadline=None)
@given(small_instances(min_n=2, max_n=7), st.data())
def test_losses_permutation_equivariant(inst, data):
    model, _ = inst
    n = model.n
    perm = data.draw(st.permutations(range(n)))
    pm = LossModel(model.kind, metric=model.metric.permuted(perm))
    inv = {old: new for new, old in enumerate(perm)}
    S = data.draw(st.sets(st.integers(0, n - 1), min_size=1))
    for i in S:
        assert loss(pm, inv[i], {inv[j] for j in S}) == pytest.approx(loss(model, i, S), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_points_always_valid(n, dim, seed):
    rows = np.random.default_rng(seed).normal(scale=50, size=(n, dim))
    assert validate_metric(metric_from_points(rows)) == []


def test_cluster_losses_vector():
    C = Clustering.from_sets([{0, 1}, {2, 3}])
    assert cluster_losses(LossModel.average(LINE), C).tolist() == [0.5, 0.5, 0.5, 0.5]
