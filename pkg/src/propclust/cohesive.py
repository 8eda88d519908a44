"""Cohesive-cluster subroutines and greedy cohesive clustering.

Every subroutine maps ``(remaining agents, loss model, threshold)`` to a
nonempty subset of the remaining agents. Ties are broken by lowest agent
index (or lowest bitmask for the exhaustive oracle), so all outputs are
deterministic.
"""

from __future__ import annotations

import enum
from typing import Iterable

import numpy as np

from .metric import Clustering, LossKind, LossModel, MetricInstance, ProblemSpec, loss
from .subsets import MAX_ENUM_AGENTS, iter_subsets, local_to_agents, max_member_loss


class Subroutine(enum.Enum):
    SMALLEST_AGENT_BALL = "smallest-agent-ball"
    SMALLEST_DIAMETER = "smallest-diameter"
    EXACT_ORACLE = "exact-oracle"


def _check_remaining(remaining) -> list[int]:
    agents = sorted(int(a) for a in remaining)
    if not agents:
        raise ValueError("cohesive subroutines need a nonempty agent set")
    return agents


def _closest_order(metric: MetricInstance, center: int, agents: list[int]) -> list[int]:
    """``agents`` by distance to ``center``, the center itself first."""
    row = metric.dist[center]
    others = [a for a in agents if a != center]
    others.sort(key=lambda a: (row[a], a))
    return [center] + others


def smallest_agent_ball(remaining: Iterable[int], metric: MetricInstance, tau: int) -> frozenset[int]:
    """The ``tau`` agents closest to the agent whose ``tau``-th closest
    remaining agent is nearest.

    Each agent counts as its own closest agent.
    """
    agents = _check_remaining(remaining)
    if tau < 1:
        raise ValueError("tau must be >= 1")
    if len(agents) <= tau:
        return frozenset(agents)
    idx = np.asarray(agents)
    sub = metric.dist[np.ix_(idx, idx)]
    # self sits at distance 0, so the tau-th smallest entry of the row is the
    # radius whichever zero is counted as "self"
    radii = np.partition(sub, tau - 1, axis=1)[:, tau - 1]
    center = agents[int(np.argmin(radii))]  # argmin returns the first minimum
    return frozenset(_closest_order(metric, center, agents)[:tau])


def smallest_diameter(remaining: Iterable[int], metric: MetricInstance, tau: int) -> frozenset[int]:
    """Narrowest window of ``tau`` consecutive agents on the line."""
    agents = _check_remaining(remaining)
    if metric.positions is None:
        raise ValueError("smallest_diameter needs 1-D positions")
    if tau < 1:
        raise ValueError("tau must be >= 1")
    if len(agents) <= tau:
        return frozenset(agents)
    order = sorted(agents, key=lambda a: (metric.positions[a], a))
    best, best_width = 0, None
    for s in range(len(order) - tau + 1):
        width = metric.dist[order[s], order[s + tau - 1]]
        if best_width is None or width < best_width:
            best, best_width = s, width
    return frozenset(order[best : best + tau])


def most_cohesive_cluster_exact(remaining: Iterable[int], model: LossModel, tau: int) -> frozenset[int]:
    """Exhaustive minimiser of ``max_{i in S} l_i(S)`` over ``|S| >= tau``.

    For the maximum loss only sets of size exactly ``min(tau, |N'|)`` are
    scanned: adding members never lowers anybody's maximum loss.
    """
    agents = _check_remaining(remaining)
    if tau < 1:
        raise ValueError("tau must be >= 1")
    t = min(tau, len(agents))
    if t == len(agents):
        return frozenset(agents)
    exact_size = model.kind is LossKind.MAXIMUM
    best_obj, best_mask = np.inf, None
    for chunk in iter_subsets(model, agents, cap=MAX_ENUM_AGENTS):
        ok = chunk.sizes == t if exact_size else chunk.sizes >= t
        if not ok.any():
            continue
        obj = np.where(ok, max_member_loss(chunk), np.inf)
        r = int(np.argmin(obj))
        if ok[r] and (best_mask is None or obj[r] < best_obj):
            best_obj, best_mask = obj[r], int(chunk.local_masks[r])
    return local_to_agents(agents, best_mask)


def cohesive_objective(model: LossModel, S: Iterable[int]) -> float:
    """``max_{i in S} l_i(S)``, the quantity the subroutines approximate."""
    S = frozenset(S)
    return max(loss(model, i, S) for i in S)


def run_subroutine(sub: Subroutine, remaining: Iterable[int], model: LossModel, tau: int) -> frozenset[int]:
    if sub is Subroutine.EXACT_ORACLE:
        return most_cohesive_cluster_exact(remaining, model, tau)
    if model.metric is None:
        raise ValueError(f"{sub.value} needs a metric loss model")
    if sub is Subroutine.SMALLEST_AGENT_BALL:
        return smallest_agent_ball(remaining, model.metric, tau)
    return smallest_diameter(remaining, model.metric, tau)


def greedy_cohesive_clustering(sub: Subroutine, spec: ProblemSpec, model: LossModel) -> Clustering:
    """Repeatedly extract ``sub(N', tau)`` until no agent is left."""
    tau = spec.tau
    remaining = set(range(spec.n))
    found = []
    while remaining:
        S = run_subroutine(sub, remaining, model, tau)
        if not S or not S <= remaining:
            raise RuntimeError(f"{sub.value} returned an invalid cluster {sorted(S)}")
        found.append(S)
        remaining -= S
    assert len(found) <= spec.k, f"{len(found)} clusters for k={spec.k}"
    return Clustering.from_sets(found, k=spec.k)


def greedy_capture(spec: ProblemSpec, metric: MetricInstance) -> Clustering:
    """Greedy cohesive clustering with smallest agent-centred balls.

    It reads the metric only, so one output serves every metric loss.
    """
    return greedy_cohesive_clustering(Subroutine.SMALLEST_AGENT_BALL, spec, LossModel.maximum(metric))
