"""Command-line interface.

Exit codes: 0 success, 2 input error, 3 capacity guard, 4 internal
invariant violation.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from .core import distribution_of, histogram_of
from .exceptions import CapacityError, CountMechError, InputError, InvariantViolation
from .io import read_count_table, read_rationals, write_count_table, write_json, write_rows_csv
from .metrics import all_distances
from .oracle import KINDS, PolytopeDescriptor, enumerate_vertices, vertices_to_json
from .pipeline import (
    CONSTRUCTORS,
    DATASETS,
    PipelineConfig,
    bench,
    generate_synthetic,
    rule_of_thumb_split,
    run_experiment,
    run_two_stage,
)
from .privatizers import PRIVATIZERS
from .constructors import SELECTORS

EXIT_OK, EXIT_INPUT, EXIT_CAPACITY, EXIT_INVARIANT = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def _constructor(args) -> str:
    kind = args.constructor
    if kind == "heuristic":
        return f"heuristic-{args.selector or 'sandwich'}"
    if args.selector is not None:
        if not kind.startswith("heuristic-"):
            raise InputError("--selector applies only to heuristic constructors")
        return f"heuristic-{args.selector}"
    return kind


def _add_budget(p, split=True):
    p.add_argument("--epsilon-total", type=float, required=True)
    if split:
        p.add_argument("--split", type=float, default=None, help="privatizer share f; rule of thumb if omitted")


def _add_two_stage(p):
    p.add_argument("--privatizer", choices=PRIVATIZERS, default="cyclic-laplace")
    p.add_argument("--sigma", type=float, default=None, help="noise level for cyclic-gaussian")
    p.add_argument("--error", choices=("ead", "mse"), default="ead")
    p.add_argument("--floor-z", action="store_true")
    p.add_argument("--numeric-mode", choices=("float", "rational"), default="float")
    p.add_argument("--lp-method", choices=("highs", "simplex"), default="highs")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="countmech", description="Distribution-preserving private count tables.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("privatize", help="run the two-stage pipeline on a CSV table")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--report", required=True)
    _add_budget(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--constructor", choices=CONSTRUCTORS + ("heuristic",), required=True)
    p.add_argument("--selector", choices=SELECTORS + ("auto",), default=None)
    p.add_argument("--seed", type=int, required=True)
    _add_two_stage(p)

    p = sub.add_parser("analyze", help="distribution distances between two tables")
    p.add_argument("--original", required=True)
    p.add_argument("--privatized", required=True)
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("enumerate", help="exact vertices of F, U, RF or RU")
    p.add_argument("--polytope", choices=KINDS, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--lambda", dest="lam", required=True, help="rational, e.g. 2 or 3/2")
    p.add_argument("--fixed-point", default=None, help="'uniform' or comma-separated rationals")
    p.add_argument("--output", default=None, help="write JSON here instead of stdout")

    p = sub.add_parser("bench", help="time constructions over a range of n")
    p.add_argument("--constructors", required=True, help="comma-separated constructor names")
    p.add_argument("--n-range", required=True, help="a:b:step (inclusive) or a comma list")
    p.add_argument("--epsilon-total", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--output", default=None, help="CSV path; stdout if omitted")

    p = sub.add_parser("split-budget", help="rule-of-thumb budget split")
    p.add_argument("--epsilon-total", type=float, required=True)

    p = sub.add_parser("experiment", help="replicated comparison on a synthetic dataset")
    p.add_argument("--dataset", choices=DATASETS, default="binomial")
    p.add_argument("--constructors", required=True, help="comma-separated constructor names")
    _add_budget(p)
    p.add_argument("--replicates", type=int, default=100)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--output", default=None, help="per-replicate CSV")
    _add_two_stage(p)
    return parser


def _split_list(text: str) -> list:
    items = [t.strip() for t in text.split(",") if t.strip()]
    if not items:
        raise InputError("expected a nonempty comma-separated list")
    return items


def parse_n_range(text: str) -> list:
    try:
        if ":" in text:
            parts = [int(t) for t in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            a, b, step = parts
            if step <= 0 or a > b:
                raise InputError(f"bad range {text!r}")
            return list(range(a, b + 1, step))
        return [int(t) for t in _split_list(text)]
    except ValueError as exc:
        raise InputError(f"bad n range {text!r}") from exc


def _config(args, n, constructor) -> PipelineConfig:
    return PipelineConfig(
        epsilon_total=args.epsilon_total, n=n, constructor=constructor,
        split_fraction=args.split, privatizer=args.privatizer, sigma=args.sigma,
        error_kind=args.error, seed=args.seed, numeric_mode=args.numeric_mode,
        floor_z=args.floor_z, lp_method=args.lp_method)


def _cmd_privatize(args):
    table = read_count_table(args.input, args.n)
    cfg = _config(args, args.n, _constructor(args))
    out, report = run_two_stage(table, cfg)
    write_count_table(args.output, out)
    write_json(args.report, report.to_dict())
    print(json.dumps(report.distances, sort_keys=True))


def _cmd_analyze(args):
    a = read_count_table(args.original, args.n)
    b = read_count_table(args.privatized, args.n)
    za = distribution_of(histogram_of(a))
    zb = distribution_of(histogram_of(b))
    print(json.dumps(all_distances(za, zb), indent=2, sort_keys=True))


def _cmd_enumerate(args):
    lam = read_rationals(args.lam)
    if len(lam) != 1:
        raise InputError("--lambda takes a single rational")
    z = None
    if args.polytope in ("F", "RF"):
        spec = args.fixed_point or "uniform"
        z = tuple([Fraction(1, args.n)] * args.n) if spec == "uniform" else tuple(read_rationals(spec))
    elif args.fixed_point is not None:
        raise InputError(f"--fixed-point does not apply to {args.polytope}")
    desc = PolytopeDescriptor(args.polytope, args.n, lam[0], z)
    doc = vertices_to_json(desc, enumerate_vertices(desc))
    if args.output:
        write_json(args.output, doc)
    else:
        print(json.dumps(doc))


def _cmd_bench(args):
    rows = bench(_split_list(args.constructors), parse_n_range(args.n_range), args.epsilon_total, args.seed)
    fields = ["constructor", "n", "wall_ms"]
    if args.output:
        write_rows_csv(args.output, rows, fields)
    else:
        write_rows_csv(sys.stdout, rows, fields)


def _cmd_split(args):
    eps = args.epsilon_total
    f = rule_of_thumb_split(eps)
    print(json.dumps({"f": f, "epsilon_1": f * eps, "epsilon_2": eps - f * eps}))


def _cmd_experiment(args):
    table = generate_synthetic(args.dataset, seed=args.seed)
    constructors = _split_list(args.constructors)
    for c in constructors:
        if c not in CONSTRUCTORS:
            raise InputError(f"unknown constructor {c!r}")
    result = run_experiment(
        table, constructors, args.epsilon_total, replicates=args.replicates, seed=args.seed,
        split_fraction=args.split, privatizer=args.privatizer, sigma=args.sigma,
        error_kind=args.error, numeric_mode=args.numeric_mode, floor_z=args.floor_z,
        lp_method=args.lp_method)
    if args.output:
        write_rows_csv(args.output, result.to_rows(),
                       ["constructor", "replicate", "wasserstein1", "ks", "tv", "count_error"])
    print(json.dumps({"medians": result.summary(), "replicates": result.replicates}, indent=2, sort_keys=True))


_COMMANDS = {
    "privatize": _cmd_privatize,
    "analyze": _cmd_analyze,
    "enumerate": _cmd_enumerate,
    "bench": _cmd_bench,
    "split-budget": _cmd_split,
    "experiment": _cmd_experiment,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _COMMANDS[args.command](args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CapacityError as exc:
        print(f"capacity guard: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (InvariantViolation, CountMechError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except OSError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
