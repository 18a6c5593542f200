"""Command line interface: ``ilprefine {refine,evaluate,bootstrap,export-ilp,report}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .coarse import build_model, write_model
from .errors import IlpRefineError
from .graph import Partition, load_graph, read_partition, write_partition
from .ilp import IlpOptions, build_ilp, export_lp
from .refine import DEFAULT_EPSILONS, RefineConfig, bootstrap_partition, evaluate, refine
from .report import read_records_jsonl, records_to_csv, report_performance, write_records_jsonl
from .selection import SelectionStrategy, budget_for, select
from .solver import DEFAULT_TIME_LIMIT

EXIT_VALIDATION = 2
SEED_ENV = "ILPREFINE_SEED"

logger = logging.getLogger("ilprefine")


def _seed(args) -> int:
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return args.seed


def _budget(text: str) -> float:
    if text.lower() in ("inf", "infinity", "unlimited"):
        return float("inf")
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("budget must be positive")
    return value


def _load_partition(graph, path, k, eps) -> Partition:
    ids = read_partition(path, graph.n)
    return Partition.from_assignment(graph, ids, k, eps)


def cmd_refine(args) -> int:
    g = load_graph(args.graph)
    p = _load_partition(g, args.partition, args.k, args.eps)
    cfg = RefineConfig(
        k=args.k,
        epsilon=args.eps,
        strategies=args.strategy,
        ilp_options=IlpOptions.preset(args.preset),
        time_limit=args.time_limit,
        rounds=args.rounds,
        seed=_seed(args),
        nonzero_budget=args.nzlimit,
        node_limit=args.node_limit,
    )
    out, record = refine(g, p, cfg, instance=args.name or Path(args.graph).stem)
    if args.out:
        write_partition(out.assignment, args.out)
    if args.records:
        write_records_jsonl([record], args.records)
    print(json.dumps(record.to_dict(), sort_keys=True))
    return 0


def cmd_evaluate(args) -> int:
    g = load_graph(args.graph)
    ids = read_partition(args.partition, g.n)
    report = evaluate(g, ids, args.k, args.eps or DEFAULT_EPSILONS)
    if args.json:
        print(json.dumps(report, sort_keys=True))
        return 0
    print(f"cut {report['cut']:g}")
    print("block weights " + " ".join(f"{w:g}" for w in report["block_weights"]))
    for row in report["balance"]:
        verdict = "balanced" if row["balanced"] else "overloaded"
        print(f"eps {row['epsilon']:g} L_max {row['l_max']:g} {verdict}")
    return 0


def cmd_bootstrap(args) -> int:
    g = load_graph(args.graph)
    p = bootstrap_partition(g, args.k, args.eps, _seed(args))
    write_partition(p.assignment, args.out)
    print(json.dumps({"cut": p.cut, "max_block_weight": p.max_block_weight()}))
    return 0


def cmd_export_ilp(args) -> int:
    g = load_graph(args.graph)
    p = _load_partition(g, args.partition, args.k, args.eps)
    budget = args.nzlimit if args.nzlimit is not None else budget_for(args.k)
    strategy = SelectionStrategy.parse(args.strategy, budget, _seed(args))
    kept = select(g, p, strategy)
    model = build_model(g, p, kept)
    inst = build_ilp(model, IlpOptions.preset(args.preset))
    export_lp(inst, args.out)
    if args.model_dump:
        write_model(model, f"{args.model_dump}.graph", f"{args.model_dump}.map")
    print(json.dumps({
        "kept": len(kept.vertices),
        "variables": inst.num_variables,
        "constraints": inst.num_constraints,
        "nonzeros": inst.num_nonzeros,
    }))
    return 0


def cmd_report(args) -> int:
    records = read_records_jsonl(args.records)
    text = records_to_csv(records) if args.raw else report_performance(records).to_csv()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ilprefine", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, partition=True):
        sp.add_argument("graph", help="METIS graph file")
        if partition:
            sp.add_argument("partition", help="partition file, one block id per line")
        sp.add_argument("--k", type=int, required=True)
        sp.add_argument("--eps", type=float, default=0.0)
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("refine", help="improve a partition")
    common(sp)
    sp.add_argument("--strategy", action="append", help="boundary | gain:<rho> | topvertices:<delta>; repeatable")
    sp.add_argument("--nzlimit", type=_budget, default=None, help="non-zero budget (default by k)")
    sp.add_argument("--time-limit", type=float, default=DEFAULT_TIME_LIMIT, help="seconds per solve, 0 = none")
    sp.add_argument("--node-limit", type=int, default=None, help="search nodes per solve (reproducible budget)")
    sp.add_argument("--rounds", type=int, default=1)
    sp.add_argument("--preset", default="BasicSymSSol", choices=IlpOptions.PRESETS)
    sp.add_argument("--out", help="write the refined partition here")
    sp.add_argument("--records", help="append the run record to this JSONL file")
    sp.add_argument("--name", help="instance name for the run record")
    sp.set_defaults(func=cmd_refine)

    sp = sub.add_parser("evaluate", help="validate a partition")
    sp.add_argument("graph")
    sp.add_argument("partition")
    sp.add_argument("--k", type=int, default=None)
    sp.add_argument("--eps", type=float, action="append", help="repeatable; default 0, 0.01, 0.03, 0.05")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("bootstrap", help="greedy balanced start partition")
    common(sp, partition=False)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_bootstrap)

    sp = sub.add_parser("export-ilp", help="write the binary program in LP format")
    common(sp)
    sp.add_argument("--strategy", default="gain:-2")
    sp.add_argument("--nzlimit", type=_budget, default=None)
    sp.add_argument("--preset", default="BasicSymSSol", choices=IlpOptions.PRESETS)
    sp.add_argument("--out", required=True)
    sp.add_argument("--model-dump", help="also write <prefix>.graph and <prefix>.map")
    sp.set_defaults(func=cmd_export_ilp)

    sp = sub.add_parser("report", help="performance CSV from JSONL run records")
    sp.add_argument("records")
    sp.add_argument("--out", help="CSV path (default stdout)")
    sp.add_argument("--raw", action="store_true", help="dump the records as CSV instead")
    sp.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (IlpRefineError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
