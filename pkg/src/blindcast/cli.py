"""``blindcast`` command line: run, sweep, lemma and coins subcommands."""

from __future__ import annotations

import argparse
import logging
import sys

from .broadcast import InvariantError
from .coins import (
    Constants,
    Y2_DEFAULT_YMAX,
    pmf_y1_table,
    pmf_y2_table,
    pmf_y3_table,
    pmf_y4_table,
)
from .harness import (
    SCALING_MODELS,
    ExperimentSpec,
    fit_scaling,
    records_to_jsonl,
    rows_to_csv,
    run_experiment,
    validate_single_tx_lemma,
)


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _constants(args: argparse.Namespace) -> Constants:
    C = 4 if args.model == "cd-directed" else 2
    if args.paper_constants:
        return Constants.paper(C)
    values = [float(v) for v in args.constants.split(",")]
    if len(values) != 4:
        raise SystemExit("--constants expects four comma-separated values c1,c2,c3,c4")
    c1, c2, c3, c4 = values
    return Constants(C=C, c1=c1, c2=c2, c3=c3, c4=c4, y2_max=args.ymax)


def _add_experiment_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=("no-cd", "cd-directed"), default="no-cd")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=10_000_000)
    p.add_argument("--constants", default="1,1,1,1", help="c1,c2,c3,c4")
    p.add_argument("--paper-constants", action="store_true")
    p.add_argument("--ymax", type=int, default=Y2_DEFAULT_YMAX, help="General-Broadcast truncation")
    p.add_argument("--workers", type=int, default=None,
                   help="process pool size (default: $BLINDCAST_THREADS or 1)")
    p.add_argument("--out", help="summary CSV path (default: stdout)")
    p.add_argument("--trials-out", help="per-trial JSONL path")


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _experiment(args: argparse.Namespace, graphs: list[str]) -> int:
    spec = ExperimentSpec(
        graphs=tuple(graphs),
        collision_detection=args.model == "cd-directed",
        constants=_constants(args),
        trials=args.trials,
        master_seed=args.seed,
        budget=args.budget,
        workers=args.workers,
        trace=getattr(args, "trace", False),
    )
    rows, records = run_experiment(spec)
    _write(args.out, rows_to_csv(rows))
    if args.trials_out:
        _write(args.trials_out, records_to_jsonl(records))
    if getattr(args, "fit", None):
        report = fit_scaling(rows, args.fit)
        print(report, file=sys.stderr)
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    return _experiment(args, [args.graph])


def cmd_sweep(args: argparse.Namespace) -> int:
    templates = {
        "path": "path:{n}", "star": "star:{n}", "clique": "clique:{n}",
        "layered": "layered:{n}:{width}", "grid": "grid:{n}x{n}", "gnp": "gnp:{n}:{p}",
    }
    graphs = [templates[args.family].format(n=n, width=args.width, p=args.p) for n in _int_list(args.ns)]
    return _experiment(args, graphs)


def cmd_lemma(args: argparse.Namespace) -> int:
    report = validate_single_tx_lemma(args.trials, args.max_len, args.seed, args.mc_samples)
    print(report)
    for k, probs, exact, other in report.violations + report.mc_outliers:
        print(f"vector {k}: exact={exact!r} other={other!r} probs={probs}")
    return 0 if not report.violations else 1


def cmd_coins_pmf(args: argparse.Namespace) -> int:
    if args.dist == "y1":
        table = pmf_y1_table(args.T, args.c1)
    elif args.dist == "y2":
        table = pmf_y2_table(args.ymax)
    elif args.dist == "y3":
        table = pmf_y3_table(args.T, args.c3)
    else:
        table = pmf_y4_table(args.T)
    lines = ["y,pmf"] + [f"{y},{p!r}" for y, p in enumerate(table.tolist())]
    _write(args.out, "\n".join(lines) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blindcast", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run trials on one graph")
    run.add_argument("--graph", required=True, help="shorthand (path:100, grid:10x10, ...) or edge-list file")
    run.add_argument("--trace", action="store_true", help="write per-round trace to stderr")
    _add_experiment_args(run)
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="run trials over a family of graphs")
    sweep.add_argument("--family", required=True, choices=("path", "star", "clique", "layered", "grid", "gnp"))
    sweep.add_argument("--ns", required=True, help="comma-separated sizes (depths for layered)")
    sweep.add_argument("--width", type=int, default=8, help="layer width for layered")
    sweep.add_argument("--p", type=float, default=0.02, help="edge probability for gnp")
    sweep.add_argument("--fit", choices=sorted(SCALING_MODELS), help="print a scaling fit to stderr")
    _add_experiment_args(sweep)
    sweep.set_defaults(func=cmd_sweep)

    lemma = sub.add_parser("lemma", help="check the single-transmission bound")
    lemma.add_argument("--trials", type=int, default=1000)
    lemma.add_argument("--max-len", type=int, default=100)
    lemma.add_argument("--seed", type=int, default=7)
    lemma.add_argument("--mc-samples", type=int, default=4000)
    lemma.set_defaults(func=cmd_lemma)

    coins = sub.add_parser("coins", help="inspect the shared-coin distributions")
    coins_sub = coins.add_subparsers(dest="coins_command", required=True)
    pmf = coins_sub.add_parser("pmf", help="dump (y, pmf) pairs as CSV")
    pmf.add_argument("--dist", choices=("y1", "y2", "y3", "y4"), required=True)
    pmf.add_argument("--T", type=int, default=1024)
    pmf.add_argument("--c1", type=float, default=1.0)
    pmf.add_argument("--c3", type=float, default=1.0)
    pmf.add_argument("--ymax", type=int, default=Y2_DEFAULT_YMAX)
    pmf.add_argument("--out")
    pmf.set_defaults(func=cmd_coins_pmf)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InvariantError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
