"""Agents, distances, loss models and clusterings.

Distances live in a dense ``n x n`` float matrix. Infinite distances use the
IEEE value ``math.inf`` (exported as :data:`INF`), so ``x + INF == INF`` and
comparisons stay total without any sentinel bookkeeping.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

INF = math.inf

ARBITRARY_MAX_AGENTS = 24


class MetricError(ValueError):
    pass


class ModelIncompleteError(KeyError):
    """An arbitrary loss table has no entry for a requested (agent, set)."""


def ratio(num: float, den: float) -> float:
    """Improvement factor ``num / den`` with the conventions used by audits.

    ``0/0 -> 1`` and ``inf/inf -> 1`` (no finite factor separates the two
    sides), ``x/0 -> inf`` for ``x > 0``.
    """
    if den == 0:
        return 1.0 if num == 0 else INF
    if math.isinf(den):
        return 1.0 if math.isinf(num) else 0.0
    return num / den


def ratio_array(num, den) -> np.ndarray:
    """Vectorised :func:`ratio` with numpy broadcasting."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / den
    out = np.where(den == 0, np.where(num == 0, 1.0, INF), out)
    out = np.where(np.isinf(den) & np.isinf(num), 1.0, out)
    return out


def mask_of(agents: Iterable[int]) -> int:
    m = 0
    for a in agents:
        m |= 1 << a
    return m


def members_of(mask: int) -> frozenset[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return frozenset(out)


@dataclass(frozen=True, eq=False)
class MetricInstance:
    """Symmetric distance matrix over ``n`` agents.

    ``positions`` is kept for 1-D (line) instances only; an agent at
    ``+inf``/``-inf`` is detached, i.e. at distance :data:`INF` from all
    other agents.
    """

    dist: np.ndarray
    positions: tuple[float, ...] | None = None

    def __post_init__(self):
        d = np.array(self.dist, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise MetricError(f"distance matrix must be square, got shape {d.shape}")
        if np.isnan(d).any() or (d < 0).any():
            raise MetricError("distances must be nonnegative (inf allowed)")
        d.setflags(write=False)
        object.__setattr__(self, "dist", d)
        if self.positions is not None:
            pos = tuple(float(p) for p in self.positions)
            if len(pos) != d.shape[0]:
                raise MetricError("positions length does not match n")
            object.__setattr__(self, "positions", pos)

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    def scaled(self, c: float) -> "MetricInstance":
        pos = None if self.positions is None else tuple(c * p for p in self.positions)
        return MetricInstance(self.dist * c, pos)

    def permuted(self, perm: Sequence[int]) -> "MetricInstance":
        """Relabel so that new agent ``a`` is old agent ``perm[a]``."""
        p = np.asarray(perm)
        pos = None if self.positions is None else tuple(self.positions[i] for i in p)
        return MetricInstance(self.dist[np.ix_(p, p)], pos)


class LossKind(enum.Enum):
    AVERAGE = "average"
    MAXIMUM = "maximum"
    ARBITRARY = "arbitrary"

    @classmethod
    def parse(cls, name: str) -> "LossKind":
        key = name.strip().lower()
        aliases = {"avg": "average", "max": "maximum", "arb": "arbitrary"}
        return cls(aliases.get(key, key))


@dataclass(frozen=True, eq=False)
class LossModel:
    kind: LossKind
    metric: MetricInstance | None = None
    table: Mapping[tuple[int, int], float] | None = None
    n_agents: int | None = None

    def __post_init__(self):
        if self.kind is LossKind.ARBITRARY:
            if self.table is None or self.n_agents is None:
                raise MetricError("arbitrary losses need a table and an agent count")
            if self.n_agents > ARBITRARY_MAX_AGENTS:
                raise MetricError(f"arbitrary loss tables are capped at n <= {ARBITRARY_MAX_AGENTS}")
        elif self.metric is None:
            raise MetricError(f"{self.kind.value} loss needs a metric")

    @classmethod
    def average(cls, metric: MetricInstance) -> "LossModel":
        return cls(LossKind.AVERAGE, metric=metric)

    @classmethod
    def maximum(cls, metric: MetricInstance) -> "LossModel":
        return cls(LossKind.MAXIMUM, metric=metric)

    @classmethod
    def arbitrary(cls, n: int, table: Mapping[tuple[int, int], float]) -> "LossModel":
        return cls(LossKind.ARBITRARY, table=dict(table), n_agents=n)

    @property
    def n(self) -> int:
        return self.n_agents if self.kind is LossKind.ARBITRARY else self.metric.n

    def with_kind(self, kind: LossKind) -> "LossModel":
        return LossModel(kind, metric=self.metric)

    def missing_entries(self) -> list[tuple[int, int]]:
        """(agent, mask) pairs absent from an arbitrary table."""
        if self.kind is not LossKind.ARBITRARY:
            return []
        out = []
        for mask in range(1, 1 << self.n_agents):
            for i in members_of(mask):
                if (i, mask) not in self.table:
                    out.append((i, mask))
        return out


@dataclass(frozen=True)
class ProblemSpec:
    n: int
    k: int

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise ValueError(f"need 1 <= k <= n, got n={self.n}, k={self.k}")

    @property
    def tau(self) -> int:
        return -(-self.n // self.k)


@dataclass(frozen=True)
class Clustering:
    """A partition of ``range(n)`` into ``k`` (possibly empty) clusters."""

    clusters: tuple[frozenset[int], ...]
    assignment: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        clusters = tuple(frozenset(int(a) for a in c) for c in self.clusters)
        object.__setattr__(self, "clusters", clusters)
        n = sum(len(c) for c in clusters)
        assign = [-1] * n
        for t, c in enumerate(clusters):
            for a in c:
                if a < 0 or a >= n:
                    raise ValueError(f"agent {a} out of range for n={n}")
                if assign[a] != -1:
                    raise ValueError(f"agent {a} appears in more than one cluster")
                assign[a] = t
        object.__setattr__(self, "assignment", tuple(assign))

    @classmethod
    def from_labels(cls, labels: Sequence[int], k: int | None = None) -> "Clustering":
        labels = [int(x) for x in labels]
        k = max(labels) + 1 if k is None else k
        groups = [[] for _ in range(k)]
        for a, lab in enumerate(labels):
            groups[lab].append(a)
        return cls(tuple(frozenset(g) for g in groups))

    @classmethod
    def from_sets(cls, sets: Iterable[Iterable[int]], k: int | None = None) -> "Clustering":
        sets = [frozenset(s) for s in sets]
        if k is not None:
            nonempty = [s for s in sets if s]
            if len(nonempty) > k:
                raise ValueError(f"{len(nonempty)} nonempty clusters exceed k={k}")
            sets = nonempty + [frozenset()] * (k - len(nonempty))
        return cls(tuple(sets))

    @property
    def n(self) -> int:
        return len(self.assignment)

    @property
    def k(self) -> int:
        return len(self.clusters)

    def cluster_of(self, i: int) -> frozenset[int]:
        return self.clusters[self.assignment[i]]

    def nonempty(self) -> list[frozenset[int]]:
        return [c for c in self.clusters if c]

    def canonical(self) -> tuple[tuple[int, ...], ...]:
        """Order-free key: sorted tuple of sorted nonempty clusters."""
        return tuple(sorted(tuple(sorted(c)) for c in self.clusters if c))


def loss(model: LossModel, i: int, S: Iterable[int]) -> float:
    S = frozenset(S)
    if i not in S:
        raise ValueError(f"agent {i} is not a member of {sorted(S)}")
    if model.kind is LossKind.ARBITRARY:
        key = (i, mask_of(S))
        try:
            return float(model.table[key])
        except KeyError:
            raise ModelIncompleteError(f"no loss for agent {i} and set {sorted(S)}") from None
    row = model.metric.dist[i]
    if model.kind is LossKind.AVERAGE:
        # sequential sum in index order, matching the subset tables bit for bit
        total = 0.0
        for j in sorted(S):
            total += float(row[j])
        return total / len(S)
    return max(float(row[j]) for j in S)


def cluster_losses(model: LossModel, C: Clustering) -> np.ndarray:
    """``l_i(C(i))`` for every agent."""
    out = np.empty(C.n)
    for c in C.clusters:
        for i in c:
            out[i] = loss(model, i, c)
    return out


def validate_metric(m: MetricInstance, rtol: float = 1e-12) -> list[str]:
    """Every violated metric axiom, one message per offending pair/triple.

    The triangle check allows a relative slack of ``rtol`` so that Euclidean
    distances rounded to the nearest float are not reported.
    """
    d = m.dist
    n = m.n
    out = []
    for i in range(n):
        if d[i, i] != 0:
            out.append(f"identity violation: d({i},{i}) = {d[i, i]}")
    for i in range(n):
        for j in range(i + 1, n):
            if d[i, j] != d[j, i]:
                out.append(f"symmetry violation ({i},{j}): {d[i, j]} != {d[j, i]}")
    # d[i, j] <= d[i, k] + d[k, j], vectorised over (i, j) per k
    for k in range(n):
        via = d[:, k][:, None] + d[k, :][None, :]
        bad = np.argwhere(d > via * (1 + rtol))
        for i, j in bad:
            out.append(f"triangle violation ({i},{j},{k}): d={d[i, j]} > {via[i, j]}")
    return out


def metric_from_positions(positions: Sequence[float]) -> MetricInstance:
    """Line metric; agents at +/-inf are detached (INF from everyone else)."""
    p = np.asarray(positions, dtype=float)
    with np.errstate(invalid="ignore"):
        d = np.abs(p[:, None] - p[None, :])
    d[np.isnan(d)] = INF  # +inf vs -inf gives inf - inf
    inf_pos = np.isinf(p)
    d[np.ix_(inf_pos, inf_pos)] = INF
    np.fill_diagonal(d, 0.0)
    return MetricInstance(d, tuple(p))


def metric_from_points(rows) -> MetricInstance:
    """Euclidean metric over feature vectors; positions kept in 1-D."""
    try:
        x = np.asarray(rows, dtype=float)
    except ValueError as exc:
        raise MetricError(f"rows must share one dimension: {exc}") from None
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise MetricError("rows must share one dimension")
    if x.shape[1] == 1:
        return metric_from_positions(x[:, 0])
    diff = x[:, None, :] - x[None, :, :]
    d = np.sqrt((diff**2).sum(axis=2))
    np.fill_diagonal(d, 0.0)
    return MetricInstance(d)
