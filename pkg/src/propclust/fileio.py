"""Plain-text instance and clustering files.

Instance files come in three flavours, selected by the first non-comment
line (``#`` starts a comment):

``n k``
    followed by ``n`` lines of ``n`` whitespace-separated distances; the token
    ``inf`` stands for an infinite distance.
``points [k]``
    followed by comma-separated coordinate rows (Euclidean metric). One-column
    rows may use ``inf``/``-inf`` for detached agents.
``arbitrary n k``
    followed by ``agent mask loss`` triples of an arbitrary loss table.

Clustering files hold one cluster per line as space-separated agent indices;
blank lines are empty clusters.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .metric import INF, Clustering, LossModel, MetricInstance, metric_from_points


class InstanceFormatError(ValueError):
    pass


@dataclass
class InstanceFile:
    k: int | None
    metric: MetricInstance | None = None
    rows: np.ndarray | None = None
    model: LossModel | None = None  # arbitrary tables only

    @property
    def n(self) -> int:
        return self.model.n if self.metric is None else self.metric.n


def _num(tok: str, where: str) -> float:
    t = tok.strip().lower()
    if t in ("inf", "+inf", "infinity"):
        return INF
    if t == "-inf":
        return -INF
    try:
        return float(t)
    except ValueError:
        raise InstanceFormatError(f"{where}: cannot parse {tok!r} as a number") from None


def parse_instance(text: str) -> InstanceFile:
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise InstanceFormatError("empty instance file")
    head = lines[0].split()
    body = lines[1:]
    if head[0].lower() == "points":
        k = int(head[1]) if len(head) > 1 else None
        rows = [[_num(t, f"row {r + 1}") for t in ln.split(",")] for r, ln in enumerate(body)]
        if len({len(r) for r in rows}) > 1:
            raise InstanceFormatError("points rows differ in dimension")
        arr = np.array(rows, dtype=float)
        return InstanceFile(k, metric=metric_from_points(arr), rows=arr)
    if head[0].lower() == "arbitrary":
        n, k = int(head[1]), int(head[2])
        table = {}
        for r, ln in enumerate(body):
            parts = ln.split()
            if len(parts) != 3:
                raise InstanceFormatError(f"table line {r + 1}: expected 'agent mask loss'")
            table[(int(parts[0]), int(parts[1]))] = _num(parts[2], f"table line {r + 1}")
        return InstanceFile(k, model=LossModel.arbitrary(n, table))
    if len(head) != 2:
        raise InstanceFormatError("header must be 'n k', 'points [k]' or 'arbitrary n k'")
    n, k = int(head[0]), int(head[1])
    if len(body) != n:
        raise InstanceFormatError(f"expected {n} distance rows, found {len(body)}")
    d = []
    for r, ln in enumerate(body):
        toks = ln.split()
        if len(toks) != n:
            raise InstanceFormatError(f"row {r + 1}: expected {n} entries, found {len(toks)}")
        d.append([_num(t, f"row {r + 1}") for t in toks])
    return InstanceFile(k, metric=MetricInstance(np.array(d)))


def read_instance(path) -> InstanceFile:
    return parse_instance(Path(path).read_text())


def _tok(x: float) -> str:
    if x == INF:
        return "inf"
    if x == -INF:
        return "-inf"
    return repr(float(x))


def format_distances(metric: MetricInstance, k: int) -> str:
    out = [f"{metric.n} {k}"]
    out += [" ".join(_tok(x) for x in row) for row in metric.dist]
    return "\n".join(out) + "\n"


def format_points(rows, k: int | None = None) -> str:
    rows = np.asarray(rows, dtype=float)
    if rows.ndim == 1:
        rows = rows[:, None]
    head = "points" if k is None else f"points {k}"
    return "\n".join([head] + [",".join(_tok(x) for x in r) for r in rows]) + "\n"


def format_arbitrary(model: LossModel, k: int) -> str:
    items = sorted(model.table.items(), key=lambda kv: (kv[0][1], kv[0][0]))
    lines = [f"arbitrary {model.n} {k}"] + [f"{i} {m} {_tok(v)}" for (i, m), v in items]
    return "\n".join(lines) + "\n"


def format_fixture(fx) -> str:
    """Serialise a fixture: line fixtures as points, others as distances."""
    if fx.metric is None:
        return format_arbitrary(fx.model, fx.spec.k)
    if fx.metric.positions is not None:
        return format_points(fx.metric.positions, fx.spec.k)
    return format_distances(fx.metric, fx.spec.k)


def format_clustering(C: Clustering) -> str:
    return "".join(" ".join(str(a) for a in sorted(c)) + "\n" for c in C.clusters)


def parse_clustering(text: str, k: int | None = None) -> Clustering:
    lines = text.splitlines()
    while lines and not lines[-1].strip() and (k is None or len(lines) > k):
        lines.pop()
    sets = [frozenset(int(t) for t in ln.split()) for ln in lines]
    return Clustering.from_sets(sets, k=k)


def read_clustering(path, k: int | None = None) -> Clustering:
    return parse_clustering(Path(path).read_text(), k)
