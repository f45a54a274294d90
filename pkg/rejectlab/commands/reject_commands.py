"""Apply a single rejector to a task"""

import argparse
import logging
import math

import numpy as np

from rejectlab.commands.common import (
    add_lambda_flag,
    add_loss_flag,
    add_out_flag,
    add_rejector_flag,
    settings_from,
)
from rejectlab.errors import InvalidInputError
from rejectlab.models.rejector import LossKind
from rejectlab.services.rejector_service import rejector_service
from rejectlab.storage.table_store import emit
from rejectlab.storage.task_store import RejectorRecord, read_task, write_rejector

logger = logging.getLogger(__name__)


def build_record(task, settings, tau=None, kappa=None) -> RejectorRecord:
    """Mask and threshold for the configured rejector.

    chow uses --cost; marginal and joint take --tau or --kappa; kl and
    bhatta work on the divergence scale and take --kappa or --tau, always
    under the modified log-loss.
    """
    if tau is not None and kappa is not None:
        raise InvalidInputError("give at most one of --tau and --kappa")
    kind = LossKind.from_flag(settings.loss)
    lam = settings.lambda_

    if settings.rejector == "chow":
        mask = rejector_service.chow_rule(kind, task, settings.cost)
        return RejectorRecord(
            mask=mask.astype(int).tolist(),
            kind="chow",
            loss=kind.value,
            tau_or_kappa=settings.cost,
            scale="cost",
        )

    if tau is None and kappa is None:
        raise InvalidInputError(f"the {settings.rejector} rejector needs --tau or --kappa")

    if settings.rejector in ("kl", "bhatta"):
        kind = LossKind.MODIFIED_LOG
        ratio = (
            rejector_service.marginal_ratio(kind, task, lam)
            if settings.rejector == "kl"
            else rejector_service.joint_ratio(kind, task, lam)
        )
        if kappa is None:
            kappa = rejector_service.kappa_for_tau(ratio, tau, rejector_service.divergence_scores(ratio, task))
        if settings.rejector == "kl":
            mask = rejector_service.kl_rejector(task, lam, kappa)
        else:
            mask = rejector_service.bhatta_rejector(task, lam, kappa)
        threshold, scale = kappa, "divergence"
    else:
        ratio = (
            rejector_service.marginal_ratio(kind, task, lam)
            if settings.rejector == "marginal"
            else rejector_service.joint_ratio(kind, task, lam)
        )
        if tau is None:
            mask = rejector_service.divergence_reject(ratio, kappa)
            tau = rejector_service.tau_for_kappa(ratio, kappa)
            # past the float range only kappa itself can be recorded
            threshold, scale = (tau, "ratio") if math.isfinite(tau) else (kappa, "divergence")
        else:
            mask = rejector_service.threshold_reject(ratio, tau)
            threshold, scale = tau, "ratio"

    return RejectorRecord(
        mask=np.asarray(mask).astype(int).tolist(),
        kind=settings.rejector,
        loss=kind.value,
        lambda_=lam,
        tau_or_kappa=threshold,
        scale=scale,
        normalizer=ratio.normalizer,
    )


def reject(args: argparse.Namespace) -> int:
    settings = settings_from(args, "loss", "lambda_", "rejector", "cost", "out")
    record = build_record(read_task(args.task), settings, args.tau, args.kappa)
    logger.info("%s rejector rejects %d of %d inputs", record.kind, sum(record.mask), len(record.mask))
    emit(write_rejector(record), settings.out)
    return 0


def register(subparsers):
    parser = subparsers.add_parser("reject", help="apply one rejector and write its mask")
    parser.add_argument("task", help="task file")
    add_loss_flag(parser)
    add_lambda_flag(parser)
    add_rejector_flag(parser)
    parser.add_argument("--cost", type=float, help="rejection cost c for Chow's rule")
    parser.add_argument("--tau", type=float, help="ratio-scale threshold")
    parser.add_argument("--kappa", type=float, help="divergence-scale threshold")
    add_out_flag(parser)
    parser.set_defaults(handler=reject)
