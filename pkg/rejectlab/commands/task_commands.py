"""Task generation command"""

import argparse
import logging

from rejectlab.commands.common import add_out_flag, settings_from
from rejectlab.services.task_service import task_service
from rejectlab.storage.table_store import emit
from rejectlab.storage.task_store import dumps_task, fingerprint

logger = logging.getLogger(__name__)


def gen(args: argparse.Namespace) -> int:
    """Generate a synthetic task file"""
    settings = settings_from(
        args,
        "n_inputs",
        "n_labels",
        "marginal_concentration",
        "posterior_concentration",
        "model_noise",
        "seed",
        "out",
    )
    task = task_service.generate_task(settings.task)
    emit(dumps_task(task), settings.out)
    logger.info("Task %s written to %s", fingerprint(task), settings.out or "stdout")
    return 0


def register(subparsers):
    parser = subparsers.add_parser("gen", help="generate a random finite task")
    parser.add_argument("--n-inputs", dest="n_inputs", type=int)
    parser.add_argument("--n-labels", dest="n_labels", type=int)
    parser.add_argument("--marginal-concentration", dest="marginal_concentration", type=float)
    parser.add_argument("--posterior-concentration", dest="posterior_concentration", type=float)
    parser.add_argument("--model-noise", dest="model_noise", type=float)
    parser.add_argument("--seed", type=int)
    add_out_flag(parser)
    parser.set_defaults(handler=gen)
