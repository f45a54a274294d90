"""Property-suite command"""

import argparse

from rejectlab.commands.common import add_out_flag, settings_from
from rejectlab.errors import VerificationFailure
from rejectlab.services.verification_service import verification_service
from rejectlab.storage.table_store import write_report


def verify(args: argparse.Namespace) -> int:
    """Run the suite, write the JSON report, fail when any check fails"""
    settings = settings_from(args, "seed", "trials", "workers", "out")
    report = verification_service.run_verification_suite(
        settings.seed, settings.trials, settings.workers, args.check
    )
    write_report(report, settings.out)
    if not report.passed:
        raise VerificationFailure(report)
    return 0


def register(subparsers):
    parser = subparsers.add_parser("verify", help="run the property suite")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--trials", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument(
        "--check",
        action="append",
        metavar="NAME",
        help="run only this check (repeatable)",
    )
    add_out_flag(parser)
    parser.set_defaults(handler=verify)
