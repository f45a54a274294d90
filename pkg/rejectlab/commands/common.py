"""Flags shared by several subcommands"""

import argparse

from rejectlab.config import load_settings
from rejectlab.models.settings import RunSettings
from rejectlab.services.sweep_service import read_tau_grid


def add_loss_flag(parser: argparse.ArgumentParser):
    parser.add_argument("--loss", choices=["zero-one", "log", "modified-log"], help="loss function")


def add_lambda_flag(parser: argparse.ArgumentParser):
    parser.add_argument("--lambda", dest="lambda_", type=float, help="temperature lambda > 0")


def add_rejector_flag(parser: argparse.ArgumentParser):
    parser.add_argument("--rejector", choices=["chow", "marginal", "joint", "bhatta", "kl"])


def add_tau_grid_flag(parser: argparse.ArgumentParser):
    parser.add_argument("--tau-grid", dest="tau_grid", help="'auto' or a file with one tau per line")


def add_out_flag(parser: argparse.ArgumentParser):
    parser.add_argument("--out", help="output path (stdout when omitted)")


def settings_from(args: argparse.Namespace, *names: str) -> RunSettings:
    """Merge the named flags over the config file and environment defaults"""
    overrides = {name: getattr(args, name, None) for name in names}
    return load_settings(args.config, overrides)


def tau_grid_from(settings: RunSettings):
    """None for the automatic grid, otherwise the grid read from file"""
    if settings.tau_grid == "auto":
        return None
    return read_tau_grid(settings.tau_grid)
