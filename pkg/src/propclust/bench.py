"""Dataset ingestion, weighted sampling and the sampled-fairness experiment.

Each trial draws one weighted sample that every algorithm and every ``k``
share. GreedyCapture is deterministic and runs once per sample; the seeded
baselines are run ``baseline_runs`` times and their measures averaged.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import zlib
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path

import numpy as np

from .audit import audit_fjr, approximation_factor, core_ratio, exact_core_approximation, exact_fjr_approximation
from .baselines import SeededRun, kmeans_pp, kmedoids, objective_cost, objective_kmeans, objective_kmedoids
from .cohesive import Subroutine, greedy_capture
from .metric import INF, Clustering, LossKind, LossModel, ProblemSpec, metric_from_points
from .subsets import MAX_ENUM_AGENTS

log = logging.getLogger(__name__)

ALGORITHMS = ("greedy-capture", "kmeans-pp", "kmedoids")
AUDIT_MODES = ("exact", "approximate", "interval")
OBJECTIVES = ("cost", "kmeans", "kmedoids")
RESULT_HEADER = ("algorithm", "k", "trial", "loss", "measure", "value")
BUNDLED_DATASET = "census_sample.csv"


class DataError(ValueError):
    pass


@dataclass
class Dataset:
    rows: np.ndarray
    weights: np.ndarray | None = None
    feature_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=float)
        if self.rows.ndim == 1:
            self.rows = self.rows[:, None]
        if self.weights is not None:
            self.weights = np.asarray(self.weights, dtype=float)
            if len(self.weights) != len(self.rows):
                raise DataError("weights and rows differ in length")
            if (self.weights < 0).any() or not self.weights.sum() > 0:
                raise DataError("weights must be nonnegative with a positive sum")

    def __len__(self) -> int:
        return len(self.rows)


def _standardize(x: np.ndarray) -> np.ndarray:
    """Per-column z-score; zero-variance columns become all zeros."""
    mu = x.mean(axis=0)
    sd = x.std(axis=0)
    out = np.zeros_like(x)
    ok = sd > 0
    out[:, ok] = (x[:, ok] - mu[ok]) / sd[ok]
    return out


def _parse_float(cell: str) -> float | None:
    try:
        v = float(cell)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def _encode_column(name: str, cells: list[str], strict: bool) -> np.ndarray | None:
    """Numeric column as floats, a two-valued text column as 0/1."""
    vals = [_parse_float(c) for c in cells]
    if all(v is not None for v in vals):
        return np.array(vals)
    levels = sorted(set(c.strip() for c in cells))
    if len(levels) <= 2:
        return np.array([float(levels.index(c.strip())) for c in cells])
    if strict:
        r = next(i for i, v in enumerate(vals) if v is None)
        raise DataError(f"row {r + 2}, column {name!r}: non-numeric value {cells[r]!r}")
    return None


def parse_csv(text: str, features=None, weight_column: str | None = None, standardize: bool = True) -> Dataset:
    """Parse CSV text with a header row.

    Without ``features`` every numeric or two-valued column other than the
    weight column is kept and other text columns are skipped.
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise DataError("empty CSV") from None
    body = [r for r in reader if any(c.strip() for c in r)]
    for r, rec in enumerate(body):
        if len(rec) != len(header):
            raise DataError(f"row {r + 2}: expected {len(header)} cells, found {len(rec)}")
    cols = {h: [rec[j] for rec in body] for j, h in enumerate(header)}
    wanted = list(features) if features else [h for h in header if h != weight_column]
    for name in wanted + ([weight_column] if weight_column else []):
        if name not in cols:
            raise DataError(f"missing column {name!r}")
    names, columns = [], []
    for name in wanted:
        col = _encode_column(name, cols[name], strict=bool(features))
        if col is not None:
            names.append(name)
            columns.append(col)
    x = np.column_stack(columns) if columns else np.zeros((len(body), 0))
    if standardize and len(body):
        x = _standardize(x)
    weights = None
    if weight_column:
        w = [_parse_float(c) for c in cols[weight_column]]
        for r, v in enumerate(w):
            if v is None:
                raise DataError(f"row {r + 2}, column {weight_column!r}: non-numeric weight")
        weights = np.array(w)
    return Dataset(x, weights, names)


def load_csv(path, features=None, weight_column: str | None = None, standardize: bool = True) -> Dataset:
    return parse_csv(Path(path).read_text(), features, weight_column, standardize)


def bundled_csv_text() -> str:
    return resources.files("propclust").joinpath("data", BUNDLED_DATASET).read_text()


def load_bundled(standardize: bool = True) -> Dataset:
    """The shipped census-style table, weighted by ``fnlwgt``."""
    return parse_csv(bundled_csv_text(), weight_column="fnlwgt", standardize=standardize)


def weighted_sample(ds: Dataset, m: int, seed) -> Dataset:
    """``m`` distinct rows, each draw proportional to the remaining weights.

    Once only zero-weight rows remain the draws continue uniformly.
    """
    n = len(ds)
    if not 0 <= m <= n:
        raise DataError(f"cannot sample {m} rows from {n}")
    rng = np.random.default_rng(seed)
    w = np.ones(n) if ds.weights is None else ds.weights.astype(float).copy()
    taken = np.zeros(n, dtype=bool)
    picks = []
    for _ in range(m):
        p = np.where(taken, 0.0, w)
        if not p.sum() > 0:
            p = (~taken).astype(float)
        i = int(rng.choice(n, p=p / p.sum()))
        picks.append(i)
        taken[i] = True
    weights = None if ds.weights is None else ds.weights[picks]
    if weights is not None and not weights.sum() > 0:
        weights = None
    return Dataset(ds.rows[picks], weights, list(ds.feature_names))


# -- configuration -----------------------------------------------------------


def _csv_list(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


@dataclass
class ExperimentConfig:
    algorithms: list[str] = field(default_factory=lambda: list(ALGORITHMS))
    k_values: list[int] = field(default_factory=lambda: [2, 3, 4])
    losses: list[str] = field(default_factory=lambda: ["average", "maximum"])
    sample_size: int = 16
    num_trials: int = 40
    seed: int = 0
    audit_mode: str = "exact"
    baseline_runs: int = 20
    dataset: str | None = None  # CSV path; None selects the bundled table
    features: list[str] | None = None
    weight_column: str | None = "fnlwgt"

    _ALIASES = {"k": "k_values", "trials": "num_trials", "algo": "algorithms", "loss": "losses", "runs": "baseline_runs"}

    def validate(self) -> "ExperimentConfig":
        bad = set(self.algorithms) - set(ALGORITHMS)
        if bad:
            raise ValueError(f"unknown algorithms {sorted(bad)}; choose from {ALGORITHMS}")
        for name in self.losses:
            if LossKind.parse(name) is LossKind.ARBITRARY:
                raise ValueError("experiments use average and/or maximum losses")
        if self.audit_mode not in AUDIT_MODES:
            raise ValueError(f"audit_mode must be one of {AUDIT_MODES}")
        if self.audit_mode == "exact" and self.sample_size > MAX_ENUM_AGENTS:
            raise ValueError(f"exact audits need sample_size <= {MAX_ENUM_AGENTS}")
        if any(not 1 <= k <= self.sample_size for k in self.k_values):
            raise ValueError("every k must lie in [1, sample_size]")
        if self.num_trials < 0 or self.baseline_runs < 1:
            raise ValueError("num_trials must be >= 0 and baseline_runs >= 1")
        return self

    def update(self, key: str, value: str) -> None:
        key = key.strip().replace("-", "_")
        key = self._ALIASES.get(key, key)
        names = {f.name for f in fields(self)}
        if key not in names:
            raise ValueError(f"unknown config key {key!r}")
        value = value.strip()
        if key in ("algorithms", "losses"):
            parsed = _csv_list(value)
        elif key == "features":
            parsed = _csv_list(value) or None
        elif key == "k_values":
            parsed = [int(v) for v in _csv_list(value)]
        elif key in ("sample_size", "num_trials", "seed", "baseline_runs"):
            parsed = int(value)
        elif key in ("dataset", "weight_column"):
            parsed = value or None
        else:
            parsed = value
        setattr(self, key, parsed)

    @classmethod
    def parse(cls, text: str) -> "ExperimentConfig":
        """Flat ``key = value`` lines; ``#`` starts a comment."""
        cfg = cls()
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line {lineno}: expected key = value")
            key, value = line.split("=", 1)
            cfg.update(key, value)
        return cfg

    def dump(self) -> str:
        def fmt(v):
            if isinstance(v, list):
                return ",".join(str(x) for x in v)
            return "" if v is None else str(v)

        return "".join(f"{f.name} = {fmt(getattr(self, f.name))}\n" for f in fields(self))


def load_dataset(cfg: ExperimentConfig) -> Dataset:
    if cfg.dataset is None:
        return load_bundled()
    return load_csv(cfg.dataset, cfg.features, cfg.weight_column)


# -- experiment --------------------------------------------------------------


@dataclass(frozen=True)
class ResultRow:
    algorithm: str
    k: int
    trial: int | str  # trial index, or "mean" / "std" for aggregates
    loss: str  # "average" / "maximum" for fairness measures, "none" for objectives
    measure: str
    value: float


def _seed(base: int, *parts) -> np.random.SeedSequence:
    """Stable per-task seed: independent of execution order and of Python's
    salted string hashing."""
    words = [zlib.crc32(p.encode()) if isinstance(p, str) else int(p) for p in parts]
    return np.random.SeedSequence([int(base), *words])


def _seed_int(base: int, *parts) -> int:
    return int(_seed(base, *parts).generate_state(1)[0])


def _fairness(C: Clustering, spec: ProblemSpec, model: LossModel, mode: str) -> dict[str, float]:
    if mode == "exact":
        return {
            "core": exact_core_approximation(C, spec, model)[0],
            "fjr": exact_fjr_approximation(C, spec, model)[0],
        }
    report = audit_fjr(Subroutine.SMALLEST_AGENT_BALL, C, spec, model)
    # every probed coalition is large enough, so its core ratio bounds the core approximation
    core_lower = max([1.0] + [core_ratio(C, row.coalition, model) for row in report.trace])
    if mode == "approximate":
        return {"fjr_theta": report.theta, "core_lower": core_lower}
    lam = approximation_factor(model.kind)
    return {"fjr_lower": report.theta, "fjr_upper": lam * report.theta, "core_lower": core_lower}


def _objectives(C: Clustering, rows: np.ndarray, metric) -> dict[str, float]:
    return {
        "cost": objective_cost(C, metric),
        "kmeans": objective_kmeans(C, rows),
        "kmedoids": objective_kmedoids(C, metric),
    }


def _mean(values) -> float:
    values = list(values)
    if any(v == INF for v in values):
        return INF
    return float(np.mean(values))


def _cluster(algorithm: str, rows, metric, k: int, seed: int) -> Clustering:
    if algorithm == "greedy-capture":
        return greedy_capture(ProblemSpec(len(rows), k), metric)
    run = SeededRun(seed)
    return kmeans_pp(rows, k, run) if algorithm == "kmeans-pp" else kmedoids(metric, k, run)


def run_experiment(cfg: ExperimentConfig, ds: Dataset) -> list[ResultRow]:
    """Per-trial rows plus mean/std aggregates, in a canonical order.

    Every trial also records ``within_2x`` rows for GreedyCapture: 1 when each
    of its objectives is at most twice the best baseline mean on that sample,
    else 0 (the comparison is empirical, so failures are flagged, not raised).
    """
    cfg.validate()
    if cfg.sample_size > len(ds):
        raise DataError(f"sample_size {cfg.sample_size} exceeds dataset size {len(ds)}")
    kinds = [LossKind.parse(name) for name in cfg.losses]
    rows_out: list[ResultRow] = []
    for trial in range(cfg.num_trials):
        sample = weighted_sample(ds, cfg.sample_size, _seed(cfg.seed, "sample", trial))
        x = sample.rows
        metric = metric_from_points(x)
        models = {kind: LossModel(kind, metric=metric) for kind in kinds}
        for k in cfg.k_values:
            spec = ProblemSpec(len(x), k)
            per_algo: dict[str, dict[tuple[str, str], float]] = {}
            for algo in cfg.algorithms:
                runs = 1 if algo == "greedy-capture" else cfg.baseline_runs
                seeds = [_seed_int(cfg.seed, algo, k, trial, r) for r in range(runs)]
                clusterings = [_cluster(algo, x, metric, k, s) for s in seeds]
                cache: dict = {}
                acc: dict[tuple[str, str], list[float]] = {}
                for C in clusterings:
                    key = C.canonical()
                    if key not in cache:
                        vals = {("none", name): v for name, v in _objectives(C, x, metric).items()}
                        for kind, model in models.items():
                            for name, v in _fairness(C, spec, model, cfg.audit_mode).items():
                                vals[(kind.value, name)] = v
                        cache[key] = vals
                    for key2, v in cache[key].items():
                        acc.setdefault(key2, []).append(v)
                per_algo[algo] = {key2: _mean(vs) for key2, vs in acc.items()}
                for (lossname, measure), v in per_algo[algo].items():
                    rows_out.append(ResultRow(algo, k, trial, lossname, measure, v))
            flag = _within_factor(per_algo)
            if flag is not None:
                if not flag:
                    log.warning("trial %d, k=%d: greedy-capture objective exceeds twice the best baseline", trial, k)
                rows_out.append(ResultRow("greedy-capture", k, trial, "none", "within_2x", float(flag)))
    return sort_rows(rows_out + aggregate(rows_out))


def _within_factor(per_algo) -> bool | None:
    if "greedy-capture" not in per_algo:
        return None
    base = [a for a in per_algo if a != "greedy-capture"]
    if not base:
        return None
    gc = per_algo["greedy-capture"]
    return all(gc[("none", o)] <= 2 * min(per_algo[a][("none", o)] for a in base) for o in OBJECTIVES)


def aggregate(rows: list[ResultRow]) -> list[ResultRow]:
    """Mean and population standard deviation over trials.

    An infinite value makes the mean infinite and the deviation undefined (nan).
    """
    groups: dict[tuple, list[float]] = {}
    for r in rows:
        if isinstance(r.trial, int):
            groups.setdefault((r.algorithm, r.k, r.loss, r.measure), []).append(r.value)
    out = []
    for (algo, k, lossname, measure), vals in groups.items():
        if any(math.isinf(v) for v in vals):
            mean, std = INF, math.nan
        else:
            mean, std = float(np.mean(vals)), float(np.std(vals))
        out.append(ResultRow(algo, k, "mean", lossname, measure, mean))
        out.append(ResultRow(algo, k, "std", lossname, measure, std))
    return out


def _trial_key(t) -> tuple[int, int]:
    return (0, t) if isinstance(t, int) else (1, ["mean", "std"].index(t))


def sort_rows(rows: list[ResultRow]) -> list[ResultRow]:
    return sorted(rows, key=lambda r: (r.algorithm, r.k, _trial_key(r.trial), r.loss, r.measure))


def _fmt_value(v: float) -> str:
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(float(v))


def format_results(rows: list[ResultRow]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(RESULT_HEADER)
    for r in rows:
        w.writerow([r.algorithm, r.k, r.trial, r.loss, r.measure, _fmt_value(r.value)])
    return out.getvalue()


def emit_results(rows: list[ResultRow], path) -> None:
    Path(path).write_text(format_results(rows))


def parse_results(text: str) -> list[ResultRow]:
    reader = csv.reader(io.StringIO(text))
    header = tuple(next(reader))
    if header != RESULT_HEADER:
        raise DataError(f"unexpected results header {header}")
    out = []
    for rec in reader:
        if not rec:
            continue
        algo, k, trial, lossname, measure, value = rec
        t = int(trial) if trial not in ("mean", "std") else trial
        out.append(ResultRow(algo, int(k), t, lossname, measure, float(value)))
    return out


def read_results(path) -> list[ResultRow]:
    return parse_results(Path(path).read_text())
