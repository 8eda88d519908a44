"""k-means++ and k-medoids baselines plus the three accuracy objectives.

The cost and k-means objectives count ordered pairs, so every unordered pair
contributes twice; the k-means objective is then exactly twice the familiar
centroid form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metric import INF, Clustering, MetricInstance, metric_from_points

# slack for floating-point noise in the per-iteration monotonicity assertions
_MONO_RTOL = 1e-9


@dataclass(frozen=True)
class SeededRun:
    seed: int
    max_iterations: int = 300
    tol: float = 1e-6  # relative objective change treated as converged

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def _check_k(n: int, k: int) -> None:
    if n == 0:
        raise ValueError("need at least one point")
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")


def _draw(rng: np.random.Generator, weights: np.ndarray, taken: np.ndarray) -> int:
    """Index drawn proportionally to ``weights`` among untaken points.

    Infinite weights win outright (uniformly among themselves); all-zero
    weights fall back to a uniform draw.
    """
    w = np.where(taken, 0.0, weights)
    inf = np.isinf(w)
    if inf.any():
        w = inf.astype(float)
    elif w.sum() <= 0:
        w = (~taken).astype(float)
    return int(rng.choice(len(w), p=w / w.sum()))


def _plus_plus_seeds(sq: np.ndarray, k: int, rng: np.random.Generator) -> list[int]:
    """D^2 seeding over a matrix of squared distances."""
    n = sq.shape[0]
    taken = np.zeros(n, dtype=bool)
    first = int(rng.integers(n))
    seeds = [first]
    taken[first] = True
    closest = sq[first].copy()
    while len(seeds) < k:
        s = _draw(rng, closest, taken)
        seeds.append(s)
        taken[s] = True
        closest = np.minimum(closest, sq[s])
    return seeds


def _relative_change(old: float, new: float) -> float:
    if old == new:
        return 0.0
    if not np.isfinite(old) or old == 0:
        return INF
    return abs(old - new) / abs(old)


def _sq_dists(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    return ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)


def _as_rows(rows) -> np.ndarray:
    x = np.asarray(rows, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if not np.isfinite(x).all():
        raise ValueError("k-means needs finite coordinates; embed detached agents first")
    return x


def kmeans_pp(rows, k: int, run: SeededRun) -> Clustering:
    """D^2-seeded Lloyd iterations on Euclidean vectors."""
    x = _as_rows(rows)
    n = x.shape[0]
    _check_k(n, k)
    rng = run.rng()
    centers = x[_plus_plus_seeds(_sq_dists(x, x), k, rng)].copy()
    prev = INF
    labels = None
    for _ in range(run.max_iterations):
        sq = _sq_dists(x, centers)
        labels = np.argmin(sq, axis=1)
        _repair_empty(x, centers, labels, sq)
        obj = float(sq[np.arange(n), labels].sum())
        assert obj <= prev * (1 + _MONO_RTOL), f"k-means objective rose from {prev} to {obj}"
        for t in range(k):
            centers[t] = x[labels == t].mean(axis=0)
        if _relative_change(prev, obj) <= run.tol:
            break
        prev = obj
    return Clustering.from_labels(labels, k)


def _repair_empty(x, centers, labels, sq) -> None:
    """Reseed each empty cluster at the point farthest from its center."""
    n, k = sq.shape
    for t in range(k):
        if (labels == t).any():
            continue
        counts = np.bincount(labels, minlength=k)
        own = sq[np.arange(n), labels]
        far = int(np.argmax(np.where(counts[labels] > 1, own, -1.0)))
        labels[far] = t
        centers[t] = x[far]
        sq[:, t] = ((x - centers[t]) ** 2).sum(axis=1)


def _metric_of(data) -> MetricInstance:
    return data if isinstance(data, MetricInstance) else metric_from_points(_as_rows(data))


def kmedoids(data, k: int, run: SeededRun) -> Clustering:
    """Alternating k-medoids: assign to the nearest medoid, then move each
    medoid to the member with the smallest distance sum.

    Medoids start from D^2 seeding (k-medoids++). ``data`` is either feature
    rows or a :class:`MetricInstance`.
    """
    d = _metric_of(data).dist
    n = d.shape[0]
    _check_k(n, k)
    rng = run.rng()
    with np.errstate(over="ignore"):
        medoids = _plus_plus_seeds(d**2, k, rng)
    prev = INF
    labels = None
    for _ in range(run.max_iterations):
        labels = np.argmin(d[:, medoids], axis=1)
        labels[medoids] = np.arange(k)  # a medoid always belongs to its own cluster
        obj = float(d[np.arange(n), np.asarray(medoids)[labels]].sum())
        assert obj <= prev * (1 + _MONO_RTOL), f"k-medoids objective rose from {prev} to {obj}"
        new = []
        for t in range(k):
            members = np.flatnonzero(labels == t)
            sums = d[np.ix_(members, members)].sum(axis=1)
            cur = int(np.flatnonzero(members == medoids[t])[0])
            best = int(np.argmin(sums))
            new.append(medoids[t] if sums[cur] <= sums[best] else int(members[best]))
        converged = new == medoids or _relative_change(prev, obj) <= run.tol
        medoids, prev = new, obj
        if converged:
            break
    labels = np.argmin(d[:, medoids], axis=1)
    labels[medoids] = np.arange(k)
    return Clustering.from_labels(labels, k)


# -- objectives ---------------------------------------------------------------


def objective_cost(C: Clustering, metric: MetricInstance) -> float:
    """``sum_t (1/|C_t|) sum_{i,j in C_t} d(i,j)`` over ordered pairs."""
    d = metric.dist
    total = 0.0
    for c in C.nonempty():
        idx = sorted(c)
        total += float(d[np.ix_(idx, idx)].sum()) / len(idx)
    return total


def objective_kmeans(C: Clustering, data) -> float:
    """Ordered-pair squared-distance objective.

    With feature rows the squared distances come straight from coordinates,
    avoiding a square root round trip.
    """
    total = 0.0
    if isinstance(data, MetricInstance):
        sq = data.dist**2
        for c in C.nonempty():
            idx = sorted(c)
            total += float(sq[np.ix_(idx, idx)].sum()) / len(idx)
        return total
    x = _as_rows(data)
    for c in C.nonempty():
        pts = x[sorted(c)]
        total += float(_sq_dists(pts, pts).sum()) / len(pts)
    return total


def kmeans_centroid_objective(C: Clustering, rows) -> float:
    """``sum_t sum_{x in C_t} ||x - mu_t||^2``."""
    x = _as_rows(rows)
    total = 0.0
    for c in C.nonempty():
        pts = x[sorted(c)]
        total += float(((pts - pts.mean(axis=0)) ** 2).sum())
    return total


def objective_kmedoids(C: Clustering, metric: MetricInstance) -> float:
    """``sum_t min_{m in C_t} sum_{i in C_t} d(i, m)``."""
    d = metric.dist
    total = 0.0
    for c in C.nonempty():
        idx = sorted(c)
        total += float(d[np.ix_(idx, idx)].sum(axis=0).min())
    return total
