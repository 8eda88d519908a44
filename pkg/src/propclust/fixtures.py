"""Parametric instances with known fairness behaviour.

Each generator returns a :class:`FixtureInstance`. Agents placed "at
infinity" are detached: they sit at distance ``INF`` from every other agent
and carry an infinite coordinate in ``positions``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .metric import (
    INF,
    LossKind,
    LossModel,
    MetricInstance,
    ProblemSpec,
    members_of,
    metric_from_positions,
)

GOLDEN_ALPHA = (1 + math.sqrt(3)) / 2


@dataclass(frozen=True, eq=False)
class FixtureInstance:
    model: LossModel
    spec: ProblemSpec
    provenance: str
    groups: tuple[int, ...] | None = None
    group_names: tuple[str, ...] | None = None
    group_dist: tuple[tuple, ...] | None = None  # exact group distances (Fraction or INF)

    @property
    def metric(self) -> MetricInstance | None:
        return self.model.metric

    def agents_in(self, name: str) -> list[int]:
        g = self.group_names.index(name)
        return [a for a, lab in enumerate(self.groups) if lab == g]


def _line_fixture(counts, coords, names, k, kind, provenance):
    positions, groups = [], []
    for g, (c, x) in enumerate(zip(counts, coords)):
        positions += [x] * c
        groups += [g] * c
    metric = metric_from_positions([float(x) for x in positions])
    model = LossModel(kind, metric=metric)

    def exact_gap(g, h):
        x, y = coords[g], coords[h]
        if g == h:
            return Fraction(0)
        if math.isinf(x) or math.isinf(y):
            return INF
        return abs(Fraction(x) - Fraction(y))

    G = len(coords)
    gd = tuple(tuple(exact_gap(g, h) for h in range(G)) for g in range(G))
    return FixtureInstance(model, ProblemSpec(len(positions), k), provenance, tuple(groups), tuple(names), gd)


def gen_arb_core_empty() -> FixtureInstance:
    """Four agents, k=2, arbitrary losses: every 2-clustering has a coalition
    improving by an infinite factor.

    Agents 0-2 want a pair without agent 3, each preferring its successor mod
    3; agent 3 is content only alone.
    """
    table = {}
    for mask in range(1, 16):
        S = members_of(mask)
        for i in S:
            if i == 3:
                val = 0.0 if len(S) == 1 else INF
            elif S == {0, 1, 2} or 3 in S or len(S) == 1:
                val = INF
            elif (i + 1) % 3 in S:
                val = 0.0
            else:
                val = 1.0
            table[(i, mask)] = val
    model = LossModel.arbitrary(4, table)
    return FixtureInstance(model, ProblemSpec(4, 2), "arbitrary losses with empty core")


def gen_avg_core_lb(k: int, alpha) -> FixtureInstance:
    """Average-loss instance with no alpha'-core clustering for alpha' < alpha.

    Layout: ``k/2`` agents at M0; for each area ``i`` one agent at M_i and
    ``n/k - 1`` agents at each of L_i, R_i with ``d(L_i, R_i) = 1`` and
    ``d(L_i, M_i) = d(R_i, M_i) = n / (2 k alpha)``. Distinct areas are INF apart.
    """
    if k < 2 or k % 2:
        raise ValueError("k must be even and >= 2")
    a = Fraction(alpha) if isinstance(alpha, (int, Fraction)) else Fraction(repr(float(alpha)))
    if not 1 <= a < GOLDEN_ALPHA:
        raise ValueError(f"alpha must lie in [1, {GOLDEN_ALPHA:.4f})")
    eps = GOLDEN_ALPHA - float(a)
    per = max(1 / (2 * eps) + 0.5, 4 * float(a) ** 2)
    n = k * math.ceil(per - 1e-12)
    q = n // k
    side = Fraction(n, 2 * k) / a

    names = ["M0"]
    sizes = [k // 2]
    for i in range(1, k // 2 + 1):
        names += [f"M{i}", f"L{i}", f"R{i}"]
        sizes += [1, q - 1, q - 1]
    G = len(names)
    gd = [[INF] * G for _ in range(G)]
    for g in range(G):
        gd[g][g] = Fraction(0)
    for i in range(1, k // 2 + 1):
        m, l, r = 3 * i - 2, 3 * i - 1, 3 * i
        gd[l][r] = gd[r][l] = Fraction(1)
        gd[l][m] = gd[m][l] = gd[r][m] = gd[m][r] = side
    groups = [g for g, s in enumerate(sizes) for _ in range(s)]
    d = np.array([[float(gd[gi][gj]) for gj in groups] for gi in groups])
    np.fill_diagonal(d, 0.0)
    model = LossModel.average(MetricInstance(d))
    return FixtureInstance(
        model,
        ProblemSpec(n, k),
        f"average-loss core lower bound, alpha={a}",
        tuple(groups),
        tuple(names),
        tuple(tuple(row) for row in gd),
    )


class Fig1Variant(enum.Enum):
    CORE_TIGHT = "core-tight"
    LEMMA_TIGHT = "lemma-tight"


FIG1_NAMES = ("A", "B", "C", "D", "E", "F")


def gen_fig1_line(
    n: int, eps: float, M: float = 1e6, variant: Fig1Variant = Fig1Variant.CORE_TIGHT, kind: LossKind = LossKind.MAXIMUM
) -> FixtureInstance:
    """Six locations A=-M, B=-1, C=0, D=eps, E=1, F=2-eps on a line, k=2.

    CORE_TIGHT multiplicities are 1, 2, n/2-3, 1, 1, n/2-2; LEMMA_TIGHT are
    1, n/4, n/4-1, 1, 1, n/2-2.
    """
    variant = Fig1Variant(variant)
    if n < 8 or n % 2:
        raise ValueError("n must be even and >= 8")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if variant is Fig1Variant.CORE_TIGHT:
        counts = [1, 2, n // 2 - 3, 1, 1, n // 2 - 2]
    else:
        if n % 4:
            raise ValueError("the lemma-tight variant needs n divisible by 4")
        counts = [1, n // 4, n // 4 - 1, 1, 1, n // 2 - 2]
    coords = [-M, -1.0, 0.0, eps, 1.0, 2.0 - eps]
    return _line_fixture(counts, coords, FIG1_NAMES, 2, kind, f"line instance ({variant.value}), eps={eps}")


def gen_line_avg_core_empty(n: int) -> FixtureInstance:
    """Average loss on a line with an empty core: one agent at 0, ``n/2-1``
    at 2, ``n/2-1`` at 3 and one detached agent at +inf (k=2)."""
    if n % 2 or n <= 24:
        raise ValueError("n must be even and > 24")
    counts = [1, n // 2 - 1, n // 2 - 1, 1]
    coords = [0, 2, 3, INF]
    return _line_fixture(counts, coords, ("a", "S1", "S2", "b"), 2, LossKind.AVERAGE, "line, average loss, empty core")


def gen_incompatibility(n: int, k: int) -> FixtureInstance:
    """Instance where objective-driven clusterings merge a deserving group.

    ``ceil(n/k)`` agents at 0 (group ``a``), ``n - ceil(n/k) - (k-1)`` agents
    at 1 (group ``b``) and ``k-1`` detached outliers. Objectives that pay for
    distance spend a cluster on each outlier and merge ``a`` with ``b``; the
    agents of ``a`` then deviate from a positive loss to zero.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    tau = -(-n // k)
    nb = n - tau - (k - 1)
    if nb < 1:
        raise ValueError(f"need n - ceil(n/k) >= k, got n={n}, k={k}")
    counts = [tau, nb] + [1] * (k - 1)
    coords = [0, 1] + [INF] * (k - 1)
    names = ["a", "b"] + [f"o{j}" for j in range(1, k)]
    return _line_fixture(counts, coords, names, k, LossKind.AVERAGE, "objective-driven clustering incompatibility")


def euclidean_rows(fx: FixtureInstance, separation: float = 1e6) -> np.ndarray:
    """1-D coordinates with each detached agent moved ``separation`` further
    right than the previous finite coordinate."""
    pos = fx.metric.positions if fx.metric is not None else None
    if pos is None:
        raise ValueError("only line fixtures have a Euclidean embedding")
    finite = [p for p in pos if math.isfinite(p)]
    right = max(finite) if finite else 0.0
    out = []
    for p in pos:
        if math.isfinite(p):
            out.append(p)
        else:
            right += separation
            out.append(right)
    return np.array(out)[:, None]
