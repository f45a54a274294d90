"""Command-line application"""

import argparse
import logging
import sys

from pydantic import ValidationError

from rejectlab.commands import reject_commands, sweep_commands, task_commands, verify_commands
from rejectlab.config import LOG_FORMAT, LOG_LEVEL
from rejectlab.errors import InvalidInputError, LossDomainError, VerificationFailure

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_INVALID_INPUT = 2

logger = logging.getLogger("rejectlab")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rejectlab", description="Density-ratio rejectors on finite tasks")
    parser.add_argument("--config", help="dotenv-style file with default flag values")
    parser.add_argument("--log-level", dest="log_level", default=LOG_LEVEL, help="logging level (default %(default)s)")
    subparsers = parser.add_subparsers(dest="command", required=True)

    # Include command groups
    task_commands.register(subparsers)
    sweep_commands.register(subparsers)
    reject_commands.register(subparsers)
    verify_commands.register(subparsers)
    return parser


def configure_logging(level: str):
    logging.basicConfig(level=level.upper(), format=LOG_FORMAT, stream=sys.stderr, force=True)


def run(argv=None) -> int:
    """Parse argv, dispatch to the subcommand and map failures onto exit codes"""
    args = build_parser().parse_args(argv)
    try:
        configure_logging(args.log_level)
    except ValueError:
        logger.error("Unknown log level %r", args.log_level)
        return EXIT_INVALID_INPUT

    try:
        return args.handler(args)
    except VerificationFailure as exc:
        logger.error("%s", exc)
        return EXIT_VERIFICATION_FAILED
    except (InvalidInputError, LossDomainError, ValidationError) as exc:
        logger.error("Invalid input: %s", exc)
        return EXIT_INVALID_INPUT


if __name__ == "__main__":
    sys.exit(run())
