"""Command-line interface.

Subcommands: ``gen`` writes instance files, ``solve`` runs one algorithm
on one file, ``oracle`` prints the exhaustive depth report, ``bench``
runs an experiment plan. Exit codes: 0 success, 2 usage error, 3 solve
unstable, 4 solve cap exceeded, 5 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__, bench, core, generators, oracle, solvers
from .errors import CfpError, ParseError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_UNSTABLE = 3
EXIT_CAP = 4
EXIT_IO = 5


def _default_seed() -> int:
    try:
        return int(os.environ.get("CFP_SEED", "0"))
    except ValueError:
        return 0


def _csv_list(text: str) -> list[str]:
    return [t.strip().lower() for t in text.split(",") if t.strip()]


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="cfp", description=__doc__)
    top.add_argument("--version", action="version", version=f"cfp {__version__}")
    sub = top.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an instance file")
    g.add_argument("--kind", required=True, choices=generators.KINDS)
    g.add_argument("--d", required=True, type=int)
    g.add_argument("--theta", type=float, default=generators.DEFAULT_THETA)
    g.add_argument("--eps", type=float, default=generators.DEFAULT_EPSILON)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("-o", "--output", required=True)

    s = sub.add_parser("solve", help="run one algorithm on a configuration file")
    s.add_argument("--alg", required=True, choices=solvers.ALGORITHMS)
    s.add_argument("--cap", type=int, default=None)
    s.add_argument("--no-normalize", action="store_true")
    s.add_argument("--init", choices=("first", "a4"), default="first")
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("file")

    o = sub.add_parser("oracle", help="exhaustive depth report for a file")
    o.add_argument("--list-cap", type=int, default=10000)
    o.add_argument("file")

    b = sub.add_parser("bench", help="run an experiment plan")
    b.add_argument("--plan", default=None, help="JSON plan file")
    b.add_argument("--gens", type=_csv_list, default=None)
    b.add_argument("--algs", type=_csv_list, default=None)
    b.add_argument("--dims", type=lambda t: [int(x) for x in t.split(",")], default=None)
    b.add_argument("--samples", default=None, help="e.g. 'd3=1000,d6=100' or '500'")
    b.add_argument("--cap", type=int, default=None)
    b.add_argument("--seed", type=int, default=None)
    b.add_argument("--jobs", type=int, default=None)
    b.add_argument("--theta", type=float, default=None)
    b.add_argument("--eps", type=float, default=None)
    b.add_argument("--no-normalize", action="store_true")
    b.add_argument("--force", action="store_true",
                   help="run nearest-point algorithms beyond d=96")
    b.add_argument("--quiet", action="store_true")
    b.add_argument("-o", "--output", required=True, help="output directory")
    return top


def _cmd_gen(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    spec = generators.GeneratorSpec(
        kind=args.kind, d=args.d, theta=args.theta, epsilon=args.eps, seed=seed
    )
    try:
        config = generators.generate(spec)
    except (CfpError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    comment = (
        f"kind={spec.kind} d={spec.d} theta={spec.theta!r} "
        f"epsilon={spec.epsilon!r} seed={spec.seed}"
    )
    if spec.kind in ("g4", "g6") and not generators.is_count_verified(spec):
        comment += "\ncount-unverified: solution count is not oracle-checked at this dimension"
    try:
        core.save_configuration(config, args.output, comment=comment)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _load(path):
    try:
        return core.load_configuration(path)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_IO)
    except ParseError as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _cmd_solve(args) -> int:
    config = _load(args.file)
    seed = args.seed if args.seed is not None else _default_seed()
    out = solvers.solve(
        config,
        args.alg,
        cap=args.cap,
        init_heuristic=args.init,
        normalize=not args.no_normalize,
        seed=seed,
    )
    json.dump(out.to_dict(), sys.stdout, indent=2)
    print()
    if out.status is solvers.SolveStatus.UNSTABLE:
        return EXIT_UNSTABLE
    if out.status is solvers.SolveStatus.CAP_EXCEEDED:
        return EXIT_CAP
    return EXIT_OK


def _cmd_oracle(args) -> int:
    config = _load(args.file)
    report = oracle.count_containing(config, list_cap=args.list_cap)
    json.dump(report.to_dict(), sys.stdout, indent=2)
    print()
    return EXIT_OK


def _cmd_bench(args) -> int:
    if args.no_normalize:
        args.normalize = False
    else:
        args.normalize = None
    try:
        plan = bench.parse_plan(args, plan_file=args.plan)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE if not isinstance(exc, OSError) else EXIT_IO
    if plan.master_seed == 0 and args.seed is None:
        plan = bench.ExperimentPlan(**{**plan.__dict__, "master_seed": _default_seed()})
    progress = None
    if not args.quiet:
        def progress(gen, d, n):
            print(f"  {gen} d={d}: {n} samples done", file=sys.stderr)
    try:
        bench.run_and_emit(plan, args.output, progress=progress)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return int(exc.code or 0)
    try:
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "oracle":
            return _cmd_oracle(args)
        if args.command == "bench":
            return _cmd_bench(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
