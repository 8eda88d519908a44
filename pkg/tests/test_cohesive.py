import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _instances import brute_cohesive, random_instance, small_instances
from propclust.audit import approximation_factor
from propclust.cohesive import (
    Subroutine,
    cohesive_objective,
    greedy_capture,
    greedy_cohesive_clustering,
    most_cohesive_cluster_exact,
    smallest_agent_ball,
    smallest_diameter,
)
from propclust.fixtures import Fig1Variant, gen_fig1_line
from propclust.metric import LossKind, LossModel, ProblemSpec, metric_from_points

LINE = metric_from_points([0, 1, 10, 11])


def _positions(fx, S):
    return sorted(fx.metric.positions[a] for a in S)


def test_ball_line_example():
    assert smallest_agent_ball(range(4), LINE, 2) == {0, 1}


def test_ball_small_remaining():
    assert smallest_agent_ball({3}, LINE, 5) == {3}


def test_ball_lemma_instance():
    fx = gen_fig1_line(16, 0.1, variant=Fig1Variant.LEMMA_TIGHT)
    S = smallest_agent_ball(range(16), fx.metric, 8)
    assert _positions(fx, S) == [0.1, 1.0] + [1.9] * 6
    assert cohesive_objective(fx.model, S) == pytest.approx(1.8)


def test_ball_rejects_empty():
    with pytest.raises(ValueError):
        smallest_agent_ball(set(), LINE, 2)


def test_diameter_examples():
    assert smallest_diameter(range(4), LINE, 2) == {0, 1}
    assert smallest_diameter(range(2), metric_from_points([0, 5]), 3) == {0, 1}
    assert smallest_diameter(range(4), metric_from_points([0, 2, 3, 9]), 2) == {1, 2}


def test_diameter_needs_positions():
    with pytest.raises(ValueError):
        smallest_diameter(range(3), metric_from_points([[0, 0], [1, 0], [0, 1]]), 2)


def test_exact_oracle_examples():
    avg = LossModel.average(LINE)
    assert most_cohesive_cluster_exact(range(4), avg, 4) == {0, 1, 2, 3}
    assert most_cohesive_cluster_exact(range(4), avg, 2) == {0, 1}
    fx = gen_fig1_line(16, 0.1, variant=Fig1Variant.LEMMA_TIGHT)
    E = most_cohesive_cluster_exact(range(16), fx.model, 8)
    assert _positions(fx, E) == [-1.0] * 4 + [0.0] * 3 + [0.1]
    assert cohesive_objective(fx.model, E) == pytest.approx(1.1)


def test_greedy_line_and_k1():
    spec = ProblemSpec(4, 2)
    assert greedy_capture(spec, LINE).clusters == (frozenset({0, 1}), frozenset({2, 3}))
    assert greedy_capture(ProblemSpec(4, 1), LINE).clusters == (frozenset(range(4)),)


def test_greedy_core_tight_instance():
    fx = gen_fig1_line(16, 0.1)
    C = greedy_capture(fx.spec, fx.metric)
    assert _positions(fx, C.clusters[0]) == [0.1, 1.0] + [1.9] * 6
    assert len(C.clusters[1]) == 8


def test_greedy_is_loss_agnostic():
    rng = np.random.default_rng(0)
    m = random_instance(rng, 11, LossKind.AVERAGE).metric
    spec = ProblemSpec(11, 3)
    a = greedy_cohesive_clustering(Subroutine.SMALLEST_AGENT_BALL, spec, LossModel.average(m))
    b = greedy_cohesive_clustering(Subroutine.SMALLEST_AGENT_BALL, spec, LossModel.maximum(m))
    assert a == b == greedy_capture(spec, m)


@settings(max_examples=80, deadline=None)
@given(small_instances(min_n=1, max_n=9), st.data())
def test_ball_approximates_oracle(inst, data):
    model, _ = inst
    n = model.n
    remaining = data.draw(st.sets(st.integers(0, n - 1), min_size=1))
    tau = data.draw(st.integers(1, n))
    S = smallest_agent_ball(remaining, model.metric, tau)
    assert S <= remaining and len(S) == min(tau, len(remaining))
    best = brute_cohesive(model, remaining, tau)
    E = most_cohesive_cluster_exact(remaining, model, tau)
    assert cohesive_objective(model, E) == pytest.approx(best, rel=1e-12, abs=1e-12)
    assert cohesive_objective(model, S) <= approximation_factor(model.kind) * best + 1e-12


@settings(max_examples=40, deadline=None)
@given(small_instances(min_n=2, max_n=10, kinds=(LossKind.MAXIMUM,)), st.integers(1, 10))
def test_max_oracle_size_restriction_is_harmless(inst, tau):
    model, _ = inst
    tau = min(tau, model.n)
    E = most_cohesive_cluster_exact(range(model.n), model, tau)
    assert len(E) == tau
    assert cohesive_objective(model, E) == brute_cohesive(model, range(model.n), tau)


@settings(max_examples=60, deadline=None)
@given(small_instances(min_n=1, max_n=9), st.sampled_from(list(Subroutine)))
def test_greedy_outputs_valid_clustering(inst, sub):
    model, k = inst
    if sub is Subroutine.SMALLEST_DIAMETER and model.metric.positions is None:
        sub = Subroutine.SMALLEST_AGENT_BALL
    spec = ProblemSpec(model.n, k)
    C = greedy_cohesive_clustering(sub, spec, model)
    assert C.k == k and C.n == model.n
    assert len(C.nonempty()) <= k
    assert C == greedy_cohesive_clustering(sub, spec, model)  # deterministic
