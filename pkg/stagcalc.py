import argparse
import logging
import sys
import traceback
from typing import List, Optional

from utils.logger import logger, set_console_level
from utils.utils import parse_float_list
from core.commands import cmd_flowlines, cmd_solve, cmd_stream, cmd_sweep, cmd_verify
from utils.constants import (
    DEFAULT_LEVELS,
    DEFAULT_SEED,
    DEFAULT_STREAM_RESOLUTION,
    EXIT_INPUT_ERROR,
    OUTPUT_CSV,
    OUTPUT_JSON,
    SUITE_ALL,
)


def exception_hook(exctype, value, tb):
    """Global exception handler to catch unhandled errors."""
    traceback_details = "".join(traceback.format_exception(exctype, value, tb))
    logger.critical(f"Unhandled exception: {traceback_details}")
    sys.__excepthook__(exctype, value, tb)


sys.excepthook = exception_hook


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stagcalc",
        description="Spectral solver for stationary 2D ideal flows around an elliptic stagnation point.",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="log DEBUG messages to the console")
    verbosity.add_argument("--quiet", action="store_true", help="log only warnings and errors to the console")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a problem file and write a solution file")
    p.add_argument("--problem", required=True, help="problem JSON file")
    p.add_argument("--out", required=True, help="solution JSON file to write")
    p.add_argument("--config", help="numerics JSON file overriding the problem's numerics")

    p = sub.add_parser("flowlines", help="write flow lines psi = level as CSV")
    p.add_argument("--solution", required=True, help="solution JSON file")
    p.add_argument("--levels", default=",".join(str(v) for v in DEFAULT_LEVELS), help="comma-separated psi levels")
    p.add_argument("--out", required=True, help="CSV file to write")

    p = sub.add_parser("stream", help="sample the stream function on a Cartesian grid")
    p.add_argument("--solution", required=True, help="solution JSON file")
    p.add_argument("--nx", type=int, default=DEFAULT_STREAM_RESOLUTION)
    p.add_argument("--ny", type=int, default=DEFAULT_STREAM_RESOLUTION)
    p.add_argument("--out", required=True, help="grid file to write")
    p.add_argument("--format", choices=[OUTPUT_JSON, OUTPUT_CSV], default=OUTPUT_JSON)

    p = sub.add_parser("verify", help="run numerical property suites")
    p.add_argument("--suite", default=SUITE_ALL, help="hardy, cokernel, linear, branches or all")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--trials", type=int, help="override the number of random trials per check")
    p.add_argument("--format", choices=[OUTPUT_JSON, OUTPUT_CSV], default=OUTPUT_JSON)
    p.add_argument("--config", help="numerics JSON file (gamma, m, sigma)")

    p = sub.add_parser("sweep", help="re-solve a problem over a list of parameter values")
    p.add_argument("--problem", required=True, help="problem JSON file")
    p.add_argument("--param", required=True, help="numerics field, 'scale' or 'vorticity_shift'")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--out", required=True, help="table file to write")
    p.add_argument("--format", choices=[OUTPUT_JSON, OUTPUT_CSV], default=OUTPUT_CSV)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        set_console_level(logging.DEBUG)
    elif args.quiet:
        set_console_level(logging.WARNING)

    if args.command == "solve":
        return cmd_solve(args.problem, args.out, args.config)
    if args.command == "verify":
        return cmd_verify(args.suite, args.seed, args.format, args.trials, args.config)

    if args.command == "stream":
        return cmd_stream(args.solution, args.nx, args.ny, args.out, args.format)

    try:
        values = parse_float_list(args.levels if args.command == "flowlines" else args.values)
    except ValueError as e:
        logger.error(str(e))
        return EXIT_INPUT_ERROR
    if args.command == "flowlines":
        return cmd_flowlines(args.solution, values, args.out)
    return cmd_sweep(args.problem, args.param, values, args.out, args.format)


if __name__ == "__main__":
    sys.exit(main())
