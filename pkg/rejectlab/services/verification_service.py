"""Property suite: every closed form checked against oracles and identities on random tasks"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from rejectlab.config import (
    DEFAULT_WORKERS,
    IDENTITY_TOLERANCE,
    ORACLE_MATCH_TOLERANCE,
    ORACLE_OBJECTIVE_TOLERANCE,
)
from rejectlab.errors import InvalidParameterError
from rejectlab.models.harness import CheckResult, TaskGenSpec, VerificationReport
from rejectlab.models.oracle import OracleConfig
from rejectlab.models.rejector import LossKind, Temperature
from rejectlab.models.task import FiniteTask
from rejectlab.services.divergence_service import divergence_service
from rejectlab.services.loss_service import loss_service
from rejectlab.services.oracle_service import oracle_service
from rejectlab.services.prediction_service import prediction_service
from rejectlab.services.rejector_service import RejectorService, rejector_service
from rejectlab.services.sweep_service import auto_tau_grid, sweep_service
from rejectlab.services.task_service import task_service

logger = logging.getLogger(__name__)

LOSS_KINDS = tuple(LossKind)
CHOW_COSTS = (0.0, 0.1, 0.5, 1.0)
ORACLE_LAMBDAS = (0.5, 1.0, 2.0, 10.0)
CONTAINMENT_LAMBDAS = (1.5, 2.0, 5.0, 100.0)
CHOW_EQUIVALENCE_COSTS = 50

# trials per check when no count is requested
CHECK_TRIALS = {
    "chow_optimality": 200,
    "marginal_closed_form": 100,
    "joint_closed_form": 100,
    "chow_equivalence": 100,
    "ratio_relation": 1000,
    "bhattacharyya_rejector": 1000,
    "kl_rejector": 1000,
    "divergence_relation": 1000,
    "divergence_axioms": 1000,
    "log_loss_form": 1000,
    "cascade_offset": 100,
    "sweep_monotone": 100,
}


@dataclass(frozen=True)
class TrialOutcome:
    """passed, plus the worst margin seen (negated error for identities)"""

    passed: bool
    slack: float
    detail: str = ""


def _ok(slack: float, detail: str = "") -> TrialOutcome:
    return TrialOutcome(passed=True, slack=slack, detail=detail)


def _identity(error: float, tolerance: float, detail: str = "") -> TrialOutcome:
    return TrialOutcome(passed=bool(error <= tolerance), slack=-float(error), detail=detail)


def _combine(*outcomes: TrialOutcome) -> TrialOutcome:
    failed = [o.detail for o in outcomes if not o.passed and o.detail]
    return TrialOutcome(
        passed=all(o.passed for o in outcomes),
        slack=min(o.slack for o in outcomes),
        detail="; ".join(failed),
    )


def _max_abs(a, b) -> float:
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    return float(np.max(np.abs(a - b))) if a.size else 0.0


def _random_task(rng: np.random.Generator, n_inputs: int, n_labels: int) -> FiniteTask:
    spec = TaskGenSpec(
        n_inputs=n_inputs,
        n_labels=n_labels,
        marginal_concentration=float(rng.uniform(0.5, 3.0)),
        posterior_concentration=float(rng.uniform(0.5, 3.0)),
        model_noise=float(rng.uniform(0.2, 1.5)),
        seed=int(rng.integers(0, 2**32)),
    )
    return task_service.generate_task(spec)


class VerificationService:
    """Service for running the full property suite"""

    def __init__(self, rejectors: RejectorService = rejector_service):
        self.rejectors = rejectors

    # -- individual checks; each takes a per-trial seed -------------------

    def check_chow_optimality(self, seed: int) -> TrialOutcome:
        rng = np.random.default_rng(seed)
        task = _random_task(rng, 8, 3)
        outcomes = []
        for kind in LOSS_KINDS:
            for c in CHOW_COSTS:
                mask = self.rejectors.chow_rule(kind, task, c)
                value = self.rejectors.rejection_objective(kind, task, mask, c)
                _, best = oracle_service.exhaustive_rejector_search(kind, task, c)
                outcomes.append(_identity(abs(value - best), IDENTITY_TOLERANCE, f"{kind.value} c={c}"))
        return _combine(*outcomes)

    def _oracle_task(self, rng) -> FiniteTask:
        return _random_task(rng, int(rng.integers(2, 6)), int(rng.integers(2, 4)))

    def check_marginal_closed_form(self, seed: int) -> TrialOutcome:
        rng = np.random.default_rng(seed)
        task = self._oracle_task(rng)
        kind = LOSS_KINDS[int(rng.integers(len(LOSS_KINDS)))]
        outcomes = []
        for lam in ORACLE_LAMBDAS:
            solution = oracle_service.solve_marginal_ideal(kind, task, lam, OracleConfig(seed=seed))
            scores = self.rejectors.marginal_ratio(kind, task, lam).array
            ratio = solution.distribution.array / task.marginal.array
            outcomes.append(_identity(_max_abs(ratio, scores), ORACLE_MATCH_TOLERANCE, f"ratio lambda={lam}"))
            outcomes.append(
                _identity(
                    abs(solution.objective_value - solution.closed_form_objective),
                    ORACLE_OBJECTIVE_TOLERANCE,
                    f"objective lambda={lam}",
                )
            )
            if not solution.converged:
                outcomes.append(TrialOutcome(False, -math.inf, f"no convergence lambda={lam}"))
        return _combine(*outcomes)

    def check_joint_closed_form(self, seed: int) -> TrialOutcome:
        rng = np.random.default_rng(seed)
        task = self._oracle_task(rng)
        kind = LOSS_KINDS[int(rng.integers(len(LOSS_KINDS)))]
        outcomes = []
        for lam in ORACLE_LAMBDAS:
            solution = oracle_service.solve_joint_ideal(kind, task, lam, OracleConfig(seed=seed))
            closed = oracle_service.closed_form_joint(kind, task, lam)
            outcomes.append(
                _identity(_max_abs(solution.distribution.array, closed.ravel()), ORACLE_MATCH_TOLERANCE, f"joint lambda={lam}")
            )
            scores = self.rejectors.joint_ratio(kind, task, lam).array
            outcomes.append(
                _identity(
                    _max_abs(oracle_service.marginalize(task, solution), scores),
                    ORACLE_MATCH_TOLERANCE,
                    f"marginalized lambda={lam}",
                )
            )
        return _combine(*outcomes)

    def check_chow_equivalence(self, seed: int) -> TrialOutcome:
        rng = np.random.default_rng(seed)
        task = _random_task(rng, int(rng.integers(2, 13)), int(rng.integers(2, 5)))
        kind = LOSS_KINDS[int(rng.integers(len(LOSS_KINDS)))]
        lam = float(rng.uniform(0.1, 10.0))
        top = float(np.max(loss_service.conditional_risks(kind, task)))
        outcomes = []
        for c in rng.uniform(0.0, 1.2 * top, size=CHOW_EQUIVALENCE_COSTS).tolist():
            tau = oracle_service.chow_equivalence_scan(kind, task, lam, c)
            if tau is None:
                outcomes.append(TrialOutcome(False, -1.0, f"no tau for {kind.value} c={c!r} lambda={lam!r}"))
            else:
                outcomes.append(_ok(0.0))
        return _combine(*outcomes)

    def check_ratio_relation(self, seed: int) -> TrialOutcome:
        rng = np.random.default_rng(seed)
        task = _random_task(rng, int(rng.integers(2, 13)), int(rng.integers(2, 5)))
        lam = float(rng.uniform(0.2, 10.0))
        outcomes = []
        for kind in LOSS_KINDS:
            report = self.rejectors.ratio_relation_check(kind, task, lam)
            outcomes.append(TrialOutcome(report.passed, report.worst_slack, f"{kind.value} lambda={lam!r}"))
        return _combine(*outcomes)

    def check_bhattacharyya_form(self, seed: int) -> TrialOutcome:
        rng = np.random.default_rng(seed)
        task = _random_task(rng, int(rng.integers(2, 13)), int(rng.integers(2, 5)))
        lam = Temperature(value=float(rng.uniform(1.05, 20.0)))
        joint = self.rejectors.joint_ratio(LossKind.MODIFIED_LOG, task, lam)
        bayes = task.bayes_posterior.array
        model = prediction_service.model_posterior(task)
        on_model = divergence_service.bhattacharyya_coeff_rows(lam.coefficient_skew(), model, bayes)
        on_bayes = divergence_service.bhattacharyya_coeff_rows(lam.bhattacharyya_skew(), bayes, model)
        outcomes = [
            _identity(_max_abs(joint.weights, on_model), IDENTITY_TOLERANCE, "Z_j*alpha_j vs BC(pi || pi*)"),
            _identity(_max_abs(on_model, on_bayes), IDENTITY_TOLERANCE, "skew reparameterization"),
        ]
        divergences = self.rejectors.divergence_scores(joint, task)
        for tau in auto_tau_grid(joint.array).tolist():
            kappa = self.rejectors.kappa_for_tau(joint, tau, divergences)
            same = np.array_equal(
                self.rejectors.bhatta_rejector(task, lam, kappa), self.rejectors.threshold_reject(joint, tau)
            )
            outcomes.append(TrialOutcome(same, 0.0 if same else -1.0, "" if same else f"tau/kappa bridge at tau={tau!r}"))
        return _combine(*outcomes)

    def check_kl_rejector(self, seed: int) -> TrialOutcome:
        rng = np.random.default_rng(seed)
        task = _random_task(rng, int(rng.integers(2, 13)), int(rng.integers(2, 5)))
        lam = Temperature(value=float(rng.uniform(0.2, 20.0)))
        marginal = self.rejectors.marginal_ratio(LossKind.MODIFIED_LOG, task, lam)
        kl = divergence_service.kl_rows(task.bayes_posterior.array, prediction_service.model_posterior(task))
        outcomes = [
            _identity(_max_abs(marginal.weights, np.exp(-kl / lam.value)), IDENTITY_TOLERANCE, "Z*alpha vs exp(-KL/lambda)")
        ]
        divergences = self.rejectors.divergence_scores(marginal, task)
        for tau in auto_tau_grid(marginal.array).tolist():
            kappa = self.rejectors.kappa_for_tau(marginal, tau, divergences)
            same = np.array_equal(
                self.rejectors.kl_rejector(task, lam, kappa), self.rejectors.threshold_reject(marginal, tau)
            )
            outcomes.append(TrialOutcome(same, 0.0 if same else -1.0, "" if same else f"tau/kappa bridge at tau={tau!r}"))
        return _combine(*outcomes)

    def check_divergence_relation(self, seed: int) -> TrialOutcome:
        rng = np.random.default_rng(seed)
        task = _random_task(rng, int(rng.integers(2, 13)), int(rng.integers(2, 5)))
        bayes = task.bayes_posterior.array
        model = prediction_service.model_posterior(task)
        kl = divergence_service.kl_rows(bayes, model)
        outcomes = []
        for lam in CONTAINMENT_LAMBDAS:
            skew = Temperature(value=lam).bhattacharyya_skew()
            bhatta = divergence_service.bhattacharyya_div_rows(skew, bayes, model)
            margin = float(np.min(kl / lam - bhatta))
            outcomes.append(TrialOutcome(margin >= -IDENTITY_TOLERANCE, margin, f"B <= KL/lambda at lambda={lam}"))
            renyi = divergence_service.renyi_rows(skew.beta, bayes, model)
            outcomes.append(_identity(_max_abs(bhatta, (1.0 - skew.beta) * renyi), IDENTITY_TOLERANCE, "B = (1-beta) R"))
            report = sweep_service.compare_rejectors(task, lam)
            violations = sum(row.divergence_violations for row in report.rows)
            outcomes.append(TrialOutcome(violations == 0, 0.0 if violations == 0 else -1.0, f"{violations} containment violations"))
        low = divergence_service.renyi_rows(0.3, bayes, model)
        high = divergence_service.renyi_rows(0.7, bayes, model)
        monotone = float(min(np.min(high - low), np.min(kl - high)))
        outcomes.append(TrialOutcome(monotone >= -IDENTITY_TOLERANCE, monotone, "Renyi monotone in order"))
        return _combine(*outcomes)

    def check_divergence_axioms(self, seed: int) -> TrialOutcome:
        rng = np.random.default_rng(seed)
        size = int(rng.integers(2, 6))
        p = rng.dirichlet(np.ones(size))
        q = rng.dirichlet(np.ones(size))
        beta = float(rng.uniform(0.01, 0.99))
        coeff = divergence_service.bhattacharyya_coeff(beta, p, q)
        values = [
            divergence_service.kl(p, q),
            divergence_service.bhattacharyya_div(beta, p, q),
            divergence_service.renyi(beta, p, q),
        ]
        at_equal = [
            divergence_service.kl(p, p),
            divergence_service.bhattacharyya_div(beta, p, p),
            divergence_service.renyi(beta, p, p),
        ]
        one_hot = np.eye(size)
        support_violation = divergence_service.kl(one_hot[0], one_hot[1])
        return _combine(
            TrialOutcome(0.0 <= coeff <= 1.0, min(coeff, 1.0 - coeff), "BC in [0, 1]"),
            TrialOutcome(min(values) >= -IDENTITY_TOLERANCE, min(values), "nonnegative divergences"),
            _identity(max(abs(v) for v in at_equal), IDENTITY_TOLERANCE, "zero at p = q"),
            TrialOutcome(support_violation == math.inf, 0.0, "KL infinite off support"),
        )

    def check_log_form(self, seed: int) -> TrialOutcome:
        rng = np.random.default_rng(seed)
        task = _random_task(rng, int(rng.integers(2, 13)), int(rng.integers(2, 5)))
        c = float(rng.uniform(0.0, 3.0))
        same = np.array_equal(
            self.rejectors.chow_log_form(task, c), self.rejectors.chow_rule(LossKind.LOG, task, c)
        )
        kl = divergence_service.kl_rows(task.bayes_posterior.array, prediction_service.model_posterior(task))
        decomposition = _max_abs(
            loss_service.conditional_risks(LossKind.LOG, task), loss_service.entropies(task) + kl
        )
        return _combine(
            TrialOutcome(same, 0.0 if same else -1.0, f"log form differs from Chow at c={c!r}"),
            _identity(decomposition, IDENTITY_TOLERANCE, "cross-entropy = H + KL"),
        )

    def check_cascade(self, seed: int) -> TrialOutcome:
        rng = np.random.default_rng(seed)
        task = _random_task(rng, 8, int(rng.integers(2, 5)))
        c = float(rng.uniform(0.0, 2.0))
        offset = self.rejectors.cascade_offset(task)
        n = task.n_inputs
        worst = 0.0
        for index in range(2**n):
            mask = ((index >> np.arange(n)) & 1).astype(bool)
            difference = self.rejectors.cascade_objective(task, mask, c) - self.rejectors.rejection_objective(
                LossKind.MODIFIED_LOG, task, mask, c
            )
            worst = max(worst, abs(difference - offset))
        return _identity(worst, IDENTITY_TOLERANCE, "cascade offset depends on the mask")

    def check_sweep_monotone(self, seed: int) -> TrialOutcome:
        rng = np.random.default_rng(seed)
        task = _random_task(rng, int(rng.integers(2, 13)), int(rng.integers(2, 5)))
        lam = float(rng.uniform(0.2, 10.0))
        kind = LOSS_KINDS[int(rng.integers(len(LOSS_KINDS)))]
        outcomes = []
        for rejector in ("marginal", "joint"):
            rates = np.array([row.rejection_rate for row in sweep_service.sweep(task, kind, lam, rejector).rows])
            step = float(np.min(np.diff(rates))) if rates.size > 1 else 0.0
            outcomes.append(TrialOutcome(step >= 0.0, step, f"{rejector} rejection rate decreases"))
        return _combine(*outcomes)

    # -- suite -------------------------------------------------------------

    def checks(self) -> dict[str, Callable[[int], TrialOutcome]]:
        return {
            "chow_optimality": self.check_chow_optimality,
            "marginal_closed_form": self.check_marginal_closed_form,
            "joint_closed_form": self.check_joint_closed_form,
            "chow_equivalence": self.check_chow_equivalence,
            "ratio_relation": self.check_ratio_relation,
            "bhattacharyya_rejector": self.check_bhattacharyya_form,
            "kl_rejector": self.check_kl_rejector,
            "divergence_relation": self.check_divergence_relation,
            "divergence_axioms": self.check_divergence_axioms,
            "log_loss_form": self.check_log_form,
            "cascade_offset": self.check_cascade,
            "sweep_monotone": self.check_sweep_monotone,
        }

    def run_verification_suite(
        self,
        seed: int,
        n_trials: Optional[int] = None,
        workers: int = DEFAULT_WORKERS,
        only: Optional[list[str]] = None,
    ) -> VerificationReport:
        """Run every check for n_trials seeded trials (or its CHECK_TRIALS count); passed iff all pass"""
        if n_trials is not None and n_trials <= 0:
            logger.error("Verification requested with no trials")
            return VerificationReport(
                seed=seed,
                n_trials=n_trials,
                passed=False,
                checks=(CheckResult(name="no_trials", passed=False, trials=0, detail="no trials"),),
            )

        checks = self.checks()
        unknown = sorted(set(only or ()) - set(checks))
        if unknown:
            raise InvalidParameterError(f"unknown checks: {', '.join(unknown)}")
        names = list(checks) if only is None else [name for name in checks if name in only]
        results = []
        with ThreadPoolExecutor(max_workers=workers) as executor:
            for name in names:
                # seeds depend on the check's position in the full suite, not on the selection
                offset = list(checks).index(name)
                count = n_trials if n_trials is not None else CHECK_TRIALS[name]
                seeds = np.random.SeedSequence([seed, offset]).generate_state(count).tolist()
                outcomes = list(executor.map(checks[name], seeds))
                failures = [o.detail for o in outcomes if not o.passed]
                result = CheckResult(
                    name=name,
                    passed=not failures,
                    trials=len(outcomes),
                    worst_slack=min(o.slack for o in outcomes),
                    detail=f"{len(failures)} failing trials: {failures[0]}" if failures else "",
                )
                logger.info("Check %s: %s", name, "pass" if result.passed else "FAIL")
                results.append(result)

        report = VerificationReport(
            seed=seed, n_trials=n_trials, passed=all(r.passed for r in results), checks=tuple(results)
        )
        logger.info(
            "Verification %s (%d checks, %d trials)",
            "passed" if report.passed else "failed",
            len(results),
            sum(r.trials for r in results),
        )
        return report


# Singleton instance
verification_service = VerificationService()
