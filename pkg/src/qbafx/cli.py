"""Command-line entry point ``qbafx``.

Exit codes: 0 success, 1 bad input (usage, parse, schema, config, I/O),
2 non-convergence, 3 no valid counterfactual found.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile

from . import bench
from .attribution import shapley_all, shapley_importance
from .core import load_qbaf, serialize_qbaf
from .counterfactual import CexQuery, ProblemKind, SolverConfig, solve
from .errors import NonConvergence, QbafError, SolverError
from .generators import CyclicSpec, TreeSpec, gen_cyclic, gen_tree
from .graph import polarity_map, priority_map
from .semantics import EvalConfig, Semantics, evaluate

EXIT_OK, EXIT_INPUT, EXIT_NONCONVERGENCE, EXIT_UNSOLVED = 0, 1, 2, 3

_LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _unit(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not in [0,1]")
    return v


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"{text} is not positive")
    return v


def _count(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"{text} is not a positive integer")
    return v


def write_atomic(path: str, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file in the same directory."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _eval_cfg(args) -> EvalConfig:
    return EvalConfig(tolerance=args.tol, max_iterations=args.max_iters)


def cmd_eval(args) -> int:
    q = load_qbaf(args.qbaf)
    result = evaluate(q, args.semantics, _eval_cfg(args))
    for a in q.arguments:
        print(f"{a} {result[a]:.6f}")
    return EXIT_OK


def cmd_explain(args) -> int:
    q = load_qbaf(args.qbaf)
    if args.topic not in q.base_scores:
        raise UsageError(f"unknown topic {args.topic!r}")
    query = CexQuery(args.topic, args.desired, ProblemKind(args.kind), args.delta)
    cfg = SolverConfig(
        epsilon=args.epsilon, h=args.h, c=args.c,
        use_polarity=not args.no_polarity, use_priority=not args.no_priority,
        max_sweeps=args.max_sweeps, eval=_eval_cfg(args),
    )
    try:
        result = solve(q, args.semantics, query, cfg)
    except SolverError as exc:
        if exc.result is not None:
            print(exc.result.summary())
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSOLVED
    if args.out:
        write_atomic(args.out, serialize_qbaf(q.with_scores(result.counterfactual)))
    print(result.summary())
    return EXIT_OK


def cmd_attribute(args) -> int:
    q = load_qbaf(args.qbaf)
    if args.argument:
        if args.csv:
            raise UsageError("--csv applies to the full report only")
        score = shapley_importance(q, args.semantics, args.topic, args.argument, _eval_cfg(args))
        print(f"{args.argument} {score:.6f}")
        return EXIT_OK
    report = shapley_all(q, args.semantics, args.topic, _eval_cfg(args))
    for a, v in report.rows():
        print(f"{a} {v:.6f}")
    if args.csv:
        lines = ["argument,importance"] + [f"{a},{v:.6f}" for a, v in report.rows()]
        write_atomic(args.csv, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_polarity(args) -> int:
    q = load_qbaf(args.qbaf)
    if args.topic not in q.base_scores:
        raise UsageError(f"unknown topic {args.topic!r}")
    pol = polarity_map(q, args.topic)
    pri = priority_map(q, args.topic, args.c)
    for a in q.arguments:
        label = "self" if a == args.topic else str(pol[a])
        print(f"{a} {label} {pri[a]:.6f}")
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.kind == "tree":
        if args.width is None or args.depth is None:
            raise UsageError("tree generation needs --width and --depth")
        spec = TreeSpec(args.width, args.depth, args.seed)
        q, topic = gen_tree(spec), spec.topic
    else:
        if args.n_args is None:
            raise UsageError("cyclic generation needs --n-args")
        q, topic = gen_cyclic(CyclicSpec(args.n_args, args.n_rels, args.seed))
    text = serialize_qbaf(q)
    if args.out:
        write_atomic(args.out, text)
        print(f"topic {topic}")
    else:
        sys.stdout.write(text)
        print(f"topic {topic}", file=sys.stderr)
    return EXIT_OK


def cmd_bench(args) -> int:
    config = bench.load_config(args.config)
    for path in bench.run_config(config, args.out, jobs=args.jobs):
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qbafx", description="Evaluate and explain quantitative bipolar argumentation frameworks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def with_qbaf(sp, topic=False):
        sp.add_argument("--qbaf", required=True, help="QBAF JSON file")
        sp.add_argument("--semantics", type=Semantics.parse, default=Semantics.QE, help="dfquad, qe or reb (default qe)")
        sp.add_argument("--tol", type=_positive, default=1e-6, help="fixed-point tolerance for cyclic QBAFs")
        sp.add_argument("--max-iters", type=_count, default=10_000, help="fixed-point sweep budget")
        if topic:
            sp.add_argument("--topic", required=True)

    sp = sub.add_parser("eval", help="print final strengths")
    with_qbaf(sp)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("explain", help="search a counterfactual base score function")
    with_qbaf(sp, topic=True)
    sp.add_argument("--desired", type=_unit, required=True)
    sp.add_argument("--kind", choices=[k.value for k in ProblemKind], default="delta")
    sp.add_argument("--delta", type=_positive, default=0.1)
    sp.add_argument("--epsilon", type=_positive, default=0.01)
    sp.add_argument("--h", type=float, default=0.1)
    sp.add_argument("--c", type=float, default=2.0)
    sp.add_argument("--max-sweeps", type=_count, default=100_000)
    sp.add_argument("--no-polarity", action="store_true")
    sp.add_argument("--no-priority", action="store_true")
    sp.add_argument("--out", help="write the counterfactual QBAF here (only when valid)")
    sp.set_defaults(func=cmd_explain)

    sp = sub.add_parser("attribute", help="exact Shapley attribution towards a topic")
    with_qbaf(sp, topic=True)
    sp.add_argument("--argument", help="score a single argument")
    sp.add_argument("--csv", help="also write the report as CSV")
    sp.set_defaults(func=cmd_attribute)

    sp = sub.add_parser("polarity", help="polarity and priority of every argument towards a topic")
    sp.add_argument("--qbaf", required=True)
    sp.add_argument("--topic", required=True)
    sp.add_argument("--c", type=float, default=2.0, help="self priority (> 1)")
    sp.set_defaults(func=cmd_polarity)

    sp = sub.add_parser("gen", help="generate a random QBAF")
    sp.add_argument("--kind", choices=["tree", "cyclic"], required=True)
    sp.add_argument("--width", type=int)
    sp.add_argument("--depth", type=int)
    sp.add_argument("--n-args", type=int)
    sp.add_argument("--n-rels", type=int)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("bench", help="run experiments from a JSON config")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out", required=True, help="directory for the CSV files")
    sp.add_argument("--jobs", type=_count, default=None, help="worker processes (default: all CPUs)")
    sp.set_defaults(func=cmd_bench)
    return p


def _setup_logging() -> None:
    name = os.environ.get("QBAF_LOG", "warn").lower()
    logging.basicConfig(level=_LOG_LEVELS.get(name, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    if name not in _LOG_LEVELS:
        logging.getLogger(__name__).warning("ignoring unknown QBAF_LOG level %r", name)


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NonConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except OSError as exc:
        where = exc.filename or ""
        print(f"error: {where}: {exc.strerror or exc}" if where else f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (UsageError, QbafError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
