"""Command-line entry point: ``cluster``, ``audit``, ``experiment``, ``fixture``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import bench, fileio, fixtures
from .audit import (
    AuditReport,
    Kind,
    approximation_factor,
    audit_fjr,
    exact_core_approximation,
    exact_fjr_approximation,
    format_report,
)
from .baselines import SeededRun, kmeans_pp, kmedoids
from .cohesive import Subroutine, greedy_cohesive_clustering
from .metric import LossKind, LossModel, ProblemSpec, metric_from_points

CLUSTER_ALGOS = ("greedy-capture", "smallest-diameter", "exact-oracle", "kmeans-pp", "kmedoids")
FIXTURES = ("arb-core-empty", "avg-core-lb", "fig1-line", "line-avg-core-empty", "incompatibility")


def _write(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text)


def _load(path: Path, weight_column: str | None):
    """Instance file, or a CSV table of feature rows."""
    if path.suffix.lower() == ".csv":
        ds = bench.load_csv(path, weight_column=weight_column)
        return fileio.InstanceFile(None, metric=metric_from_points(ds.rows), rows=ds.rows)
    return fileio.read_instance(path)


def _model(inst: fileio.InstanceFile, loss_name: str) -> LossModel:
    if inst.model is not None:
        return inst.model
    kind = LossKind.parse(loss_name)
    if kind is LossKind.ARBITRARY:
        raise SystemExit("--loss arbitrary needs an 'arbitrary n k' instance file")
    return LossModel(kind, metric=inst.metric)


def _spec(inst: fileio.InstanceFile, k: int | None) -> ProblemSpec:
    k = k if k is not None else inst.k
    if k is None:
        raise SystemExit("no k in the instance file; pass --k")
    return ProblemSpec(inst.n, k)


def cmd_cluster(args) -> int:
    inst = _load(args.input, args.weight_column)
    spec = _spec(inst, args.k)
    model = _model(inst, args.loss)
    algo = args.algo
    if algo in ("kmeans-pp", "kmedoids"):
        run = SeededRun(args.seed)
        if algo == "kmedoids":
            C = kmedoids(inst.metric, spec.k, run)
        elif inst.rows is None:
            raise SystemExit("kmeans-pp needs coordinates ('points' instance or CSV)")
        else:
            C = kmeans_pp(inst.rows, spec.k, run)
    else:
        sub = {
            "greedy-capture": Subroutine.SMALLEST_AGENT_BALL,
            "smallest-diameter": Subroutine.SMALLEST_DIAMETER,
            "exact-oracle": Subroutine.EXACT_ORACLE,
        }[algo]
        if sub is not Subroutine.EXACT_ORACLE and model.metric is None:
            raise SystemExit(f"{algo} needs a metric instance")
        if sub is not Subroutine.EXACT_ORACLE:
            model = LossModel(LossKind.MAXIMUM, metric=model.metric)
        C = greedy_cohesive_clustering(sub, spec, model)
    _write(fileio.format_clustering(C), args.output)
    return 0


def cmd_audit(args) -> int:
    inst = _load(args.input, args.weight_column)
    spec = _spec(inst, args.k)
    model = _model(inst, args.loss)
    C = fileio.read_clustering(args.clustering, spec.k)
    if C.n != spec.n:
        raise SystemExit(f"clustering covers {C.n} agents, instance has {spec.n}")
    kind = Kind(args.kind)
    if args.audit_mode == "exact":
        exact = exact_fjr_approximation if kind is Kind.FJR else exact_core_approximation
        value, witness = exact(C, spec, model)
        report = AuditReport(value, witness, [])
    else:
        if kind is Kind.CORE:
            raise SystemExit("core audits are exact only; use --audit-mode exact")
        sub = Subroutine(args.subroutine)
        report = audit_fjr(sub, C, spec, model)
    _write(format_report(report, kind), args.output)
    if args.audit_mode == "interval":
        lam = 1.0 if args.subroutine == Subroutine.EXACT_ORACLE.value else approximation_factor(model.kind)
        print(f"fjr interval: [{report.theta!r}, {lam * report.theta!r}]", file=sys.stderr)
    return 0


def cmd_experiment(args) -> int:
    cfg = bench.ExperimentConfig.parse(args.input.read_text()) if args.input else bench.ExperimentConfig()
    overrides = {
        "algorithms": args.algo,
        "k_values": args.k,
        "losses": args.loss,
        "seed": args.seed,
        "audit_mode": args.audit_mode,
        "sample_size": args.sample_size,
        "num_trials": args.trials,
        "dataset": args.dataset,
    }
    for key, value in overrides.items():
        if value is not None:
            cfg.update(key, str(value))
    cfg.validate()
    rows = bench.run_experiment(cfg, bench.load_dataset(cfg))
    text = bench.format_results(rows)
    _write(text, args.output)
    if args.output is not None:
        meta = cfg.dump() + "preprocessing = per-feature z-score, zero-variance features set to 0\n"
        args.output.with_name(args.output.name + ".meta").write_text(meta)
    return 0


def cmd_fixture(args) -> int:
    name = args.name
    if name == "arb-core-empty":
        fx = fixtures.gen_arb_core_empty()
    elif name == "avg-core-lb":
        fx = fixtures.gen_avg_core_lb(args.k or 2, args.alpha)
    elif name == "fig1-line":
        fx = fixtures.gen_fig1_line(args.n or 16, args.eps, args.M, fixtures.Fig1Variant(args.variant))
    elif name == "line-avg-core-empty":
        fx = fixtures.gen_line_avg_core_empty(args.n or 26)
    else:
        fx = fixtures.gen_incompatibility(args.n or 12, args.k or 2)
    if args.embed:
        text = fileio.format_points(fixtures.euclidean_rows(fx, args.embed), fx.spec.k)
    else:
        text = fileio.format_fixture(fx)
    _write(f"# {fx.provenance}\n" + text, args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="propclust", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, need_input=True):
        sp.add_argument("--input", type=Path, required=need_input)
        sp.add_argument("--output", type=Path)
        sp.add_argument("--k", type=int)
        sp.add_argument("--loss", default="average", help="average, maximum or arbitrary")
        sp.add_argument("--weight-column", help="CSV weight column to drop from the features")

    c = sub.add_parser("cluster", help="cluster one instance file or CSV")
    common(c)
    c.add_argument("--algo", choices=CLUSTER_ALGOS, default="greedy-capture")
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_cluster)

    a = sub.add_parser("audit", help="audit a clustering file against an instance")
    common(a)
    a.add_argument("--clustering", type=Path, required=True)
    a.add_argument("--kind", choices=[k.value for k in Kind], default="fjr")
    a.add_argument("--audit-mode", choices=bench.AUDIT_MODES, default="exact")
    a.add_argument("--subroutine", choices=[s.value for s in Subroutine], default=Subroutine.SMALLEST_AGENT_BALL.value)
    a.set_defaults(func=cmd_audit)

    e = sub.add_parser("experiment", help="run the sampled fairness experiment")
    e.add_argument("--input", type=Path, help="key = value config file")
    e.add_argument("--output", type=Path)
    e.add_argument("--algo", help="comma-separated algorithms")
    e.add_argument("--k", help="comma-separated k values")
    e.add_argument("--loss", help="comma-separated losses")
    e.add_argument("--seed", type=int)
    e.add_argument("--audit-mode", choices=bench.AUDIT_MODES)
    e.add_argument("--sample-size", type=int)
    e.add_argument("--trials", type=int)
    e.add_argument("--dataset", help="CSV path (default: bundled census-style table)")
    e.set_defaults(func=cmd_experiment)

    f = sub.add_parser("fixture", help="write a named instance file")
    f.add_argument("name", choices=FIXTURES)
    f.add_argument("--output", type=Path)
    f.add_argument("--n", type=int)
    f.add_argument("--k", type=int)
    f.add_argument("--alpha", type=float, default=1.2)
    f.add_argument("--eps", type=float, default=0.1)
    f.add_argument("--M", type=float, default=1e6)
    f.add_argument("--variant", choices=[v.value for v in fixtures.Fig1Variant], default="core-tight")
    f.add_argument("--embed", type=float, help="write detached agents at this finite separation")
    f.set_defaults(func=cmd_fixture)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
