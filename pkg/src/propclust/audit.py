"""Core and FJR violation ratios, AuditFJR, and exhaustive auditors.

A coalition's FJR ratio is ``min_{j in S} l_j(C(j)) / max_{i in S} l_i(S)``;
its core ratio is ``min_{i in S} l_i(C(i)) / l_i(S)``. A clustering is in the
alpha-core (alpha-FJR) iff every coalition of at least ``ceil(n/k)`` agents
has ratio at most alpha, so the exact approximation is the maximum ratio,
floored at 1.
"""

from __future__ import annotations

import enum
import functools
import io
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .cohesive import Subroutine, run_subroutine
from .metric import (
    INF,
    Clustering,
    LossKind,
    LossModel,
    ProblemSpec,
    cluster_losses,
    loss,
    ratio,
    ratio_array,
)
from .subsets import LOW_BITS, SubsetChunk, check_cap, iter_subsets, local_to_agents, max_member_loss


class Kind(enum.Enum):
    CORE = "core"
    FJR = "fjr"


@dataclass(frozen=True)
class DeviationWitness:
    coalition: frozenset[int]
    ratio: float
    kind: Kind


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    coalition: frozenset[int]
    ratio: float
    removed: int


@dataclass
class AuditReport:
    theta: float
    best_witness: DeviationWitness | None
    trace: list[TraceRow] = field(default_factory=list)


def approximation_factor(kind: LossKind) -> float:
    """Guarantee of smallest agent balls for the most cohesive cluster."""
    return {LossKind.AVERAGE: 4.0, LossKind.MAXIMUM: 2.0}[kind]


def fjr_ratio(C: Clustering, S: Iterable[int], model: LossModel) -> float:
    S = frozenset(S)
    if not S:
        raise ValueError("coalition must be nonempty")
    num = min(loss(model, j, C.cluster_of(j)) for j in S)
    if num == 0:
        return 1.0  # a member already at loss 0 cannot be improved on
    den = max(loss(model, i, S) for i in S)
    return ratio(num, den)


def core_ratio(C: Clustering, S: Iterable[int], model: LossModel) -> float:
    S = frozenset(S)
    if not S:
        raise ValueError("coalition must be nonempty")
    return min(ratio(loss(model, i, C.cluster_of(i)), loss(model, i, S)) for i in S)


def audit_fjr(sub: Subroutine, C: Clustering, spec: ProblemSpec, model: LossModel) -> AuditReport:
    """Estimate the FJR approximation of ``C`` by peeling cohesive groups.

    Each round probes ``S = sub(N', tau)`` and removes the member of ``S``
    with the smallest loss under ``C``. With a lambda-approximate subroutine
    the true value lies in ``[theta, lambda * theta]``.
    """
    closs = cluster_losses(model, C)
    tau = spec.tau
    remaining = set(range(spec.n))
    theta, witness = 1.0, None
    trace = []
    it = 0
    while len(remaining) >= tau:
        S = run_subroutine(sub, remaining, model, tau)
        r = fjr_ratio(C, S, model)
        removed = min(S, key=lambda i: (closs[i], i))
        trace.append(TraceRow(it, S, r, removed))
        if r > theta:
            theta, witness = r, DeviationWitness(S, r, Kind.FJR)
        remaining.discard(removed)
        it += 1
    return AuditReport(theta, witness, trace)


# -- exhaustive auditors -----------------------------------------------------


@dataclass(frozen=True, eq=False)
class _Prepared:
    """Clustering-independent arrays of one subset chunk, agent-major so
    that reductions over members run along contiguous rows."""

    masks: np.ndarray
    sizes: np.ndarray
    members_t: np.ndarray  # bool (n, m)
    losses_t: np.ndarray  # float (n, m)
    max_loss: np.ndarray  # max_{i in S} l_i(S)


def _prepare(chunk: SubsetChunk) -> _Prepared:
    return _Prepared(
        chunk.local_masks,
        chunk.sizes,
        np.ascontiguousarray(chunk.members.T),
        np.ascontiguousarray(chunk.losses.T),
        max_member_loss(chunk),
    )


@functools.lru_cache(maxsize=8)
def _cached_chunks(model: LossModel, n: int) -> tuple[_Prepared, ...]:
    return tuple(_prepare(c) for c in iter_subsets(model, range(n)))


def _all_chunks(model: LossModel, n: int):
    check_cap(n)
    if n <= LOW_BITS:
        return _cached_chunks(model, n)
    return (_prepare(c) for c in iter_subsets(model, range(n)))


def _core_rows(chunk: _Prepared, closs: np.ndarray) -> np.ndarray:
    """``min_{i in S} l_i(C(i)) / l_i(S)`` per row.

    Division yields nan exactly for 0/0 and inf/inf, both of which count as
    ratio 1.
    """
    out = np.full(len(chunk.masks), INF)
    buf = np.empty(len(chunk.masks))
    for i, c in enumerate(closs):
        buf.fill(INF)
        with np.errstate(invalid="ignore", divide="ignore"):
            np.divide(c, chunk.losses_t[i], out=buf, where=chunk.members_t[i])
        buf[np.isnan(buf)] = 1.0
        np.minimum(out, buf, out=out)
    return out


def _min_member_closs(chunk: _Prepared, closs: np.ndarray) -> np.ndarray:
    out = np.full(len(chunk.masks), INF)
    # assigning in decreasing loss order leaves the minimum over members
    for i in np.argsort(-closs, kind="stable"):
        out[chunk.members_t[i]] = closs[i]
    return out


def _best_coalition(C, spec, model, kind: Kind, size_exact: bool):
    closs = cluster_losses(model, C)
    tau = spec.tau
    best, best_mask = -INF, None
    for chunk in _all_chunks(model, spec.n):
        ok = chunk.sizes == tau if size_exact else chunk.sizes >= tau
        if kind is Kind.FJR:
            num = _min_member_closs(chunk, closs)
            r = np.where(num == 0, 1.0, ratio_array(num, chunk.max_loss))
        else:
            r = _core_rows(chunk, closs)
        r = np.where(ok, r, -INF)
        j = int(np.argmax(r))
        if r[j] > best:
            best, best_mask = r[j], int(chunk.masks[j])
    return best, best_mask


def _finish(C, model, kind, best, best_mask):
    if best_mask is None or not best > 1.0:
        return 1.0, None
    S = local_to_agents(range(C.n), best_mask)
    r = fjr_ratio(C, S, model) if kind is Kind.FJR else core_ratio(C, S, model)
    if not r > 1.0:
        return 1.0, None
    return r, DeviationWitness(S, r, kind)


def exact_fjr_approximation(C: Clustering, spec: ProblemSpec, model: LossModel, groups: Sequence[int] | None = None):
    """Smallest alpha for which ``C`` is alpha-FJR, with a maximising coalition.

    Under the maximum loss only coalitions of exactly ``tau`` agents are
    scanned: shrinking a coalition never lowers its ratio. With ``groups``
    (colocation labels) the search runs over per-group counts instead.
    """
    if groups is not None:
        return _grouped_exact(C, spec, model, groups, Kind.FJR)
    best, mask = _best_coalition(C, spec, model, Kind.FJR, size_exact=model.kind is LossKind.MAXIMUM)
    return _finish(C, model, Kind.FJR, best, mask)


def exact_core_approximation(C: Clustering, spec: ProblemSpec, model: LossModel, groups: Sequence[int] | None = None):
    """Smallest alpha for which ``C`` is in the alpha-core."""
    if groups is not None:
        return _grouped_exact(C, spec, model, groups, Kind.CORE)
    best, mask = _best_coalition(C, spec, model, Kind.CORE, size_exact=False)
    return _finish(C, model, Kind.CORE, best, mask)


def bicriteria_core_check(
    C: Clustering, spec: ProblemSpec, model: LossModel, alpha: float, delta: float
) -> DeviationWitness | None:
    """A coalition of at least ``delta * n / k`` agents that all improve by
    more than a factor ``alpha``, or None if ``C`` is in the (alpha, delta)-core.
    """
    if delta < 1:
        raise ValueError("delta must be >= 1")
    if delta > spec.k:  # delta * n / k > n: no coalition is large enough
        return None
    closs = cluster_losses(model, C)
    for chunk in _all_chunks(model, spec.n):
        dev = chunk.sizes * spec.k >= delta * spec.n
        for i, c in enumerate(closs):
            with np.errstate(invalid="ignore"):
                dev &= ~chunk.members_t[i] | (alpha * chunk.losses_t[i] < c)
        if dev.any():
            S = local_to_agents(range(spec.n), int(chunk.masks[int(np.argmax(dev))]))
            return DeviationWitness(S, core_ratio(C, S, model), Kind.CORE)
    return None


# -- colocation symmetry -----------------------------------------------------


def _group_index(groups: Sequence[int]):
    labels = sorted(set(groups))
    members = [[a for a, g in enumerate(groups) if g == lab] for lab in labels]
    return members


def _check_colocated(dist: np.ndarray, members) -> None:
    for ms in members:
        rep = dist[ms[0]]
        for a in ms[1:]:
            if not np.array_equal(dist[a], rep):
                raise ValueError(f"agents {ms[0]} and {a} share a group but are not colocated")


def _group_loss(gd, counts, g, kind: LossKind):
    if kind is LossKind.AVERAGE:
        total = 0
        for h, c in enumerate(counts):
            if c:
                if gd[g][h] == INF:
                    return INF
                total += c * gd[g][h]
        return total / sum(counts)
    return max(gd[g][h] for h, c in enumerate(counts) if c)


def _grouped_exact(C, spec, model, groups, kind: Kind):
    if model.kind is LossKind.ARBITRARY:
        raise ValueError("colocation symmetry needs a metric loss")
    members = _group_index(groups)
    dist = model.metric.dist
    _check_colocated(dist, members)
    reps = [ms[0] for ms in members]
    gd = dist[np.ix_(reps, reps)].tolist()
    closs = cluster_losses(model, C)
    # members of each group by decreasing loss under C, ties by index
    ranked = [sorted(ms, key=lambda a: (-closs[a], a)) for ms in members]
    tau = spec.tau
    best, best_S = -INF, None
    for counts in itertools.product(*[range(len(ms) + 1) for ms in members]):
        if sum(counts) < tau:
            continue
        gl = {g: _group_loss(gd, counts, g, model.kind) for g, c in enumerate(counts) if c}
        # taking the c_g highest-loss members of each group is optimal for both ratios
        weakest = {g: closs[ranked[g][c - 1]] for g, c in enumerate(counts) if c}
        if kind is Kind.FJR:
            r = ratio(min(weakest.values()), max(gl.values()))
        else:
            r = min(ratio(weakest[g], gl[g]) for g in gl)
        if r > best:
            best = r
            best_S = frozenset(a for g, c in enumerate(counts) for a in ranked[g][:c])
    if best_S is None or not best > 1.0:
        return 1.0, None
    r = fjr_ratio(C, best_S, model) if kind is Kind.FJR else core_ratio(C, best_S, model)
    if not r > 1.0:
        return 1.0, None
    return r, DeviationWitness(best_S, r, kind)


def _exact_number(x, literal: bool = False):
    if isinstance(x, (Fraction, int)):
        return Fraction(x)
    if math.isinf(x):
        return INF
    # a float literal such as 1.2 is read as the decimal it was written as
    return Fraction(repr(float(x))) if literal else Fraction(x)


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def core_escape(instance, spec: ProblemSpec, alpha) -> list[tuple[int, ...]] | None:
    """A k-clustering (as per-cluster group-count vectors) with no coalition
    improving every member by more than ``alpha``, or None if none exists.

    Runs in exact rational arithmetic over group counts.
    """
    groups = getattr(instance, "groups", None)
    if groups is None:
        raise ValueError("instance declares no colocation groups")
    model = instance.model
    if model.kind is LossKind.ARBITRARY:
        raise ValueError("colocation symmetry needs a metric loss")
    members = _group_index(groups)
    sizes = [len(ms) for ms in members]
    G = len(sizes)
    gd = getattr(instance, "group_dist", None)
    if gd is None:
        _check_colocated(model.metric.dist, members)
        reps = [ms[0] for ms in members]
        gd = [[_exact_number(model.metric.dist[a, b]) for b in reps] for a in reps]
    else:
        gd = [[_exact_number(x) for x in row] for row in gd]
    a = _exact_number(alpha, literal=True)
    tau = spec.tau
    kind = model.kind

    coalitions = []
    for c in itertools.product(*[range(s + 1) for s in sizes]):
        if sum(c) >= tau:
            scaled = {}
            for g in range(G):
                if c[g]:
                    lg = _group_loss(gd, c, g, kind)
                    scaled[g] = a * lg if lg != INF else INF
            coalitions.append((c, scaled))

    seen = set()
    for split in itertools.product(*[list(_compositions(s, spec.k)) for s in sizes]):
        clusters = tuple(tuple(split[g][t] for g in range(G)) for t in range(spec.k))
        key = tuple(sorted(clusters))
        if key in seen:
            continue
        seen.add(key)
        cell_loss = [
            [_group_loss(gd, clusters[t], g, kind) if split[g][t] else None for t in range(spec.k)] for g in range(G)
        ]
        if not any(_deviates(c, scaled, split, cell_loss, spec.k) for c, scaled in coalitions):
            return list(clusters)
    return None


def _deviates(c, scaled, split, cell_loss, k) -> bool:
    for g, target in scaled.items():
        # alpha * l_g(S) < l_g(C) must hold for c_g members of group g
        if target != target:  # nan from inf * 0: nobody improves
            return False
        avail = sum(split[g][t] for t in range(k) if split[g][t] and target < cell_loss[g][t])
        if avail < c[g]:
            return False
    return True


def symmetry_reduced_core_emptiness(instance, spec: ProblemSpec, alpha) -> bool:
    """True iff no k-clustering of ``instance`` is in the alpha-core."""
    if _exact_number(alpha, literal=True) == INF:
        return False
    return core_escape(instance, spec, alpha) is None


# -- serialisation -----------------------------------------------------------


def _fmt_set(S) -> str:
    return " ".join(str(a) for a in sorted(S))


def _fmt_num(x: float) -> str:
    return "inf" if x == INF else repr(float(x))


def format_report(report: AuditReport, kind: Kind = Kind.FJR) -> str:
    w = report.best_witness
    out = io.StringIO()
    out.write("theta,witness_members,kind,iterations\n")
    out.write(f"{_fmt_num(report.theta)},{_fmt_set(w.coalition) if w else ''},{(w.kind if w else kind).value},{len(report.trace)}\n")
    out.write("iteration,coalition,ratio,removed\n")
    for row in report.trace:
        out.write(f"{row.iteration},{_fmt_set(row.coalition)},{_fmt_num(row.ratio)},{row.removed}\n")
    return out.getvalue()


def parse_report(text: str) -> AuditReport:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 3 or lines[0] != "theta,witness_members,kind,iterations":
        raise ValueError("not an audit report")
    theta_s, members_s, kind_s, _ = lines[1].split(",")
    theta = float(theta_s)
    witness = None
    if members_s.strip():
        S = frozenset(int(a) for a in members_s.split())
        witness = DeviationWitness(S, theta, Kind(kind_s))
    trace = []
    for ln in lines[3:]:
        i, members, r, removed = ln.split(",")
        trace.append(TraceRow(int(i), frozenset(int(a) for a in members.split()), float(r), int(removed)))
    return AuditReport(theta, witness, trace)
