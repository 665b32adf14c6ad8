"""Command-line front end.

A thin client over the service layer: every subcommand builds a service
request, calls the corresponding `run_*` function in-process, and renders
the typed response. Exit codes: 0 success, 2 usage error, 3 input error,
4 solver limit exceeded.
"""

import argparse
import os
import sys

from .errors import LexsgError, LimitExceeded
from .service import (
    CheckRequest,
    DecideRequest,
    GenRequest,
    OracleRequest,
    SolveRequest,
    run_check,
    run_decide,
    run_gen,
    run_oracle,
    run_solve,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_LIMIT = 4


def _solver_flags(parser):
    parser.add_argument("--mode", choices=("vi", "exact"), default="vi")
    parser.add_argument(
        "--epsilon", type=float, default=1e-8, help="value-iteration stopping bound"
    )
    parser.add_argument(
        "--action-epsilon",
        type=float,
        default=1e-6,
        help="tolerance when filtering locally optimal actions",
    )


def _format_flag(parser):
    parser.add_argument(
        "--format",
        choices=("text", "lines"),
        default="text",
        help="'lines' emits machine-readable `value <state> ...` lines only",
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lexsg",
        description="Solve stochastic games with lexicographic reach/safety objectives.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="compute lex-values and a strategy")
    solve.add_argument("game")
    _solver_flags(solve)
    _format_flag(solve)
    solve.add_argument("--strategy-out", help="write the strategy file here")

    dec = sub.add_parser("decide", help="compare a state's lex-value to a threshold")
    dec.add_argument("game")
    _solver_flags(dec)
    dec.add_argument("--state", required=True)
    dec.add_argument(
        "--threshold", required=True, help="comma-separated rationals or decimals"
    )

    check = sub.add_parser("check", help="evaluate an exported strategy")
    check.add_argument("game")
    _solver_flags(check)
    _format_flag(check)
    check.add_argument("--strategy", required=True, help="strategy file to check")
    check.add_argument("--tolerance", type=float, default=1e-6)

    gen = sub.add_parser("gen", help="generate a case-study or random game")
    gen.add_argument(
        "--kind", choices=("hallway", "avoid", "dice", "random"), required=True
    )
    gen.add_argument("--out", help="output .sg path (default: stdout)")
    gen.add_argument("--width", type=int, default=4)
    gen.add_argument("--height", type=int, default=4)
    gen.add_argument("--slip", default="1/10")
    gen.add_argument("--damage", default="1/100")
    gen.add_argument("--search", default="1/10")
    gen.add_argument("--rounds", type=int, default=2)
    gen.add_argument("--num-states", type=int, default=6)
    gen.add_argument("--max-actions", type=int, default=3)
    gen.add_argument("--max-branching", type=int, default=3)
    gen.add_argument("--num-objectives", type=int, default=2)
    gen.add_argument(
        "--seed",
        type=int,
        default=int(os.environ.get("LEXSG_SEED", "0")),
        help="generator seed (env LEXSG_SEED overrides the default)",
    )

    oracle = sub.add_parser("oracle", help="brute-force values and solver discrepancy")
    oracle.add_argument("game")
    _solver_flags(oracle)
    oracle.add_argument("--pair-limit", type=int, default=None)
    return parser


def _read(path):
    try:
        with open(path, encoding="utf-8") as handle:
            return handle.read()
    except OSError as exc:
        raise LexsgError(f"cannot read {path}: {exc}") from exc


def _print_values(table, fmt, out):
    if fmt == "lines":
        for name, vector in table.items():
            print(f"value {name} {' '.join(vector)}", file=out)
    else:
        for name, vector in table.items():
            print(f"  {name}: ({', '.join(vector)})", file=out)


def cmd_solve(args, out):
    req = SolveRequest(
        game=_read(args.game),
        mode=args.mode,
        epsilon=args.epsilon,
        action_epsilon=args.action_epsilon,
        want_strategy=args.strategy_out is not None,
    )
    resp = run_solve(req)
    if args.format == "lines":
        _print_values(resp.values, "lines", out)
    else:
        print(f"lex-values ({resp.mode} mode):", file=out)
        _print_values(resp.values, "text", out)
        print(f"stages explored: {resp.stages}", file=out)
        print(f"solver calls: {resp.solver_calls}", file=out)
        print(f"iterations: {resp.iterations}", file=out)
        print(f"average actions per state: {resp.action_average}", file=out)
        print(f"wall time: {resp.wall_time:.3f}s", file=out)
    if args.strategy_out:
        with open(args.strategy_out, "w", encoding="utf-8") as handle:
            handle.write(resp.strategy)
        if args.format != "lines":
            print(f"strategy written to {args.strategy_out}", file=out)
    return EXIT_OK


def cmd_decide(args, out):
    req = DecideRequest(
        game=_read(args.game),
        mode=args.mode,
        epsilon=args.epsilon,
        action_epsilon=args.action_epsilon,
        state=args.state,
        threshold=args.threshold,
    )
    resp = run_decide(req)
    print("true" if resp.result else "false", file=out)
    print(
        f"value at {resp.state}: ({', '.join(resp.value)}) "
        f"vs threshold ({', '.join(resp.threshold)})",
        file=out,
    )
    return EXIT_OK


def cmd_check(args, out):
    req = CheckRequest(
        game=_read(args.game),
        mode=args.mode,
        epsilon=args.epsilon,
        action_epsilon=args.action_epsilon,
        strategy=_read(args.strategy),
        tolerance=args.tolerance,
    )
    resp = run_check(req)
    if args.format == "lines":
        _print_values(resp.achieved, "lines", out)
    else:
        print("achieved values:", file=out)
        _print_values(resp.achieved, "text", out)
    if resp.passed:
        print("PASS", file=out)
    else:
        print(f"FAIL at: {', '.join(resp.failures)}", file=out)
    return EXIT_OK


def cmd_gen(args, out):
    req = GenRequest(
        kind=args.kind,
        width=args.width,
        height=args.height,
        slip=args.slip,
        damage=args.damage,
        search=args.search,
        rounds=args.rounds,
        num_states=args.num_states,
        max_actions=args.max_actions,
        max_branching=args.max_branching,
        num_objectives=args.num_objectives,
        seed=args.seed,
    )
    resp = run_gen(req)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(resp.game)
        print(f"{resp.kind} game written to {args.out}", file=out)
    else:
        out.write(resp.game)
    return EXIT_OK


def cmd_oracle(args, out):
    req = OracleRequest(
        game=_read(args.game),
        mode=args.mode,
        epsilon=args.epsilon,
        action_epsilon=args.action_epsilon,
        pair_limit=args.pair_limit,
    )
    resp = run_oracle(req)
    print("solver values:", file=out)
    _print_values(resp.solver, "text", out)
    print("oracle values:", file=out)
    _print_values(resp.oracle, "text", out)
    print(f"max discrepancy: {resp.discrepancy}", file=out)
    print(f"wall time: {resp.wall_time:.3f}s", file=out)
    return EXIT_OK


_COMMANDS = {
    "solve": cmd_solve,
    "decide": cmd_decide,
    "check": cmd_check,
    "gen": cmd_gen,
    "oracle": cmd_oracle,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args, sys.stdout)
    except LimitExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except LexsgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
