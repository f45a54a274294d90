"""Threshold sweep, risk-coverage curve and rejector comparison commands"""

import argparse

from rejectlab.commands.common import (
    add_lambda_flag,
    add_loss_flag,
    add_out_flag,
    add_rejector_flag,
    add_tau_grid_flag,
    settings_from,
    tau_grid_from,
)
from rejectlab.models.rejector import LossKind
from rejectlab.services.sweep_service import sweep_service
from rejectlab.storage.table_store import AGREEMENT_COLUMNS, CURVE_COLUMNS, SWEEP_COLUMNS, write_csv
from rejectlab.storage.task_store import read_task

_FLAGS = ("loss", "lambda_", "rejector", "tau_grid", "out")


def sweep(args: argparse.Namespace) -> int:
    """CSV of rejection rate and selective risk per tau"""
    settings = settings_from(args, *_FLAGS)
    result = sweep_service.sweep(
        read_task(args.task),
        LossKind.from_flag(settings.loss),
        settings.lambda_,
        settings.rejector,
        tau_grid_from(settings),
    )
    write_csv(result.rows, SWEEP_COLUMNS, settings.out)
    return 0


def curve(args: argparse.Namespace) -> int:
    """CSV of coverage against selective risk"""
    settings = settings_from(args, *_FLAGS)
    rows = sweep_service.risk_coverage_curve(
        read_task(args.task),
        LossKind.from_flag(settings.loss),
        settings.lambda_,
        settings.rejector,
        tau_grid_from(settings),
    )
    write_csv(rows, CURVE_COLUMNS, settings.out)
    return 0


def compare(args: argparse.Namespace) -> int:
    """CSV of marginal/joint mask agreement at matched thresholds"""
    settings = settings_from(args, "loss", "lambda_", "tau_grid", "out")
    report = sweep_service.compare_rejectors(
        read_task(args.task),
        settings.lambda_,
        tau_grid_from(settings),
        LossKind.from_flag(settings.loss),
    )
    write_csv(report.rows, AGREEMENT_COLUMNS, settings.out)
    return 0


def register(subparsers):
    for name, handler, help_text in (
        ("sweep", sweep, "sweep a rejector over thresholds"),
        ("curve", curve, "risk-coverage curve of a rejector"),
    ):
        parser = subparsers.add_parser(name, help=help_text)
        parser.add_argument("task", help="task file")
        add_loss_flag(parser)
        add_lambda_flag(parser)
        add_rejector_flag(parser)
        add_tau_grid_flag(parser)
        add_out_flag(parser)
        parser.set_defaults(handler=handler)

    parser = subparsers.add_parser("compare", help="compare marginal and joint rejectors")
    parser.add_argument("task", help="task file")
    add_loss_flag(parser)
    add_lambda_flag(parser)
    add_tau_grid_flag(parser)
    add_out_flag(parser)
    parser.set_defaults(handler=compare)
