"""``crnase`` command line.

Exit status: 0 on success, 1 for unreadable or invalid scenarios, 2 for numerical
failures and for a failed Monte-Carlo check.
"""

import argparse
import logging
import sys
from typing import List, Optional

import yaml

from crnase import settings
from crnase.config import list_presets, load_preset_text, parse_config
from crnase.core import (
    ConfigValidationError,
    DomainError,
    GridPointError,
    NumericalError,
    ParseError,
)
from crnase.io.base import BaseCrnIO, ConsoleCrnIO, RotatingFileLoggerCrnIO
from crnase.sweep import emit_csv, run_sweep
from crnase.verify import MIN_SAMPLES, verify_monte_carlo

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NUMERICAL = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crnase",
        description="Spectral efficiency of adaptive modulation in cognitive radio networks.",
        epilog="bundled presets: " + ", ".join(list_presets()),
    )
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for progress, -vv for debugging"
    )
    parser.add_argument("--log-file", help="write logs to a rotating file instead of stderr")
    subparsers = parser.add_subparsers(dest="command", required=True)

    sweep = subparsers.add_parser("sweep", help="run a scenario sweep and write its CSV")
    sweep.add_argument("config", help="scenario INI file")
    sweep.add_argument("-o", "--output", help="CSV path (stdout when omitted)")
    sweep.add_argument("--jobs", type=int, default=1, help="worker processes for grid points")

    verify = subparsers.add_parser("verify", help="Monte-Carlo check of one grid point")
    verify.add_argument("config", help="scenario INI file")
    verify.add_argument("--samples", type=int, required=True, help=f"draws, at least {MIN_SAMPLES}")
    verify.add_argument("--at", type=float, dest="x_db", help="grid point in dB (sweep start)")
    verify.add_argument("--sigmas", type=float, help="pass band in standard errors")

    preset = subparsers.add_parser("preset", help="print a bundled scenario file")
    preset.add_argument(
        "name", nargs="?", help="preset name or figN alias; lists presets when omitted"
    )
    return parser


def build_io(verbose: int, log_file: Optional[str]) -> BaseCrnIO:
    if verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = logging.getLevelName(settings.LOG_LEVEL.upper())
        if not isinstance(level, int):
            level = logging.WARNING
    if log_file:
        return RotatingFileLoggerCrnIO("crnase", log_file, level=level)
    return ConsoleCrnIO("crnase", level=level)


def command_sweep(args, stdio: BaseCrnIO) -> int:
    cfg = parse_config(args.config)
    result = run_sweep(cfg, stdio, jobs=args.jobs)
    emit_csv(result, args.output, stdio)
    if args.output:
        stdio.log_info(f"{len(result.rows)} rows written to {args.output}")
    return EXIT_OK


def command_verify(args, stdio: BaseCrnIO) -> int:
    cfg = parse_config(args.config)
    report = verify_monte_carlo(cfg, args.samples, x_db=args.x_db, sigmas=args.sigmas, stdio=stdio)
    stdio.user_info_text(yaml.safe_dump(report.to_dict(), sort_keys=False))
    return EXIT_OK if report.passed else EXIT_NUMERICAL


def command_preset(args, stdio: BaseCrnIO) -> int:
    if args.name is None:
        stdio.user_info_text("\n".join(list_presets()))
    else:
        stdio.user_info_text(load_preset_text(args.name))
    return EXIT_OK


COMMANDS = {
    "sweep": command_sweep,
    "verify": command_verify,
    "preset": command_preset,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    stdio = build_io(args.verbose, args.log_file)

    try:
        return COMMANDS[args.command](args, stdio)
    except GridPointError as exc:
        stdio.log_error(str(exc))
        if args.verbose >= 2:
            stdio.log_traceback(exc)
        return EXIT_NUMERICAL if isinstance(exc.cause, NumericalError) else EXIT_INVALID
    except NumericalError as exc:
        stdio.log_error(f"numerical failure: {exc}")
        if args.verbose >= 2:
            stdio.log_traceback(exc)
        return EXIT_NUMERICAL
    except (ParseError, ConfigValidationError, DomainError) as exc:
        stdio.log_error(f"invalid scenario: {exc}")
        return EXIT_INVALID
    except OSError as exc:
        stdio.log_error(f"I/O error: {exc}")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
