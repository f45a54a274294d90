"""Exception hierarchy; the CLI maps these onto exit codes"""


class RejectlabError(Exception):
    """Base class for all rejectlab errors"""


class InvalidInputError(RejectlabError, ValueError):
    """Malformed vectors, shape mismatches, non-finite values, bad files"""


class InvalidParameterError(InvalidInputError):
    """A scalar parameter (lambda, skew, cost, threshold) out of range"""


class LossDomainError(RejectlabError, ArithmeticError):
    """The modified log-loss queried at a label with zero Bayes mass"""


class OracleRefusedError(InvalidParameterError):
    """The brute-force oracle declines a problem it cannot solve reliably"""


class VerificationFailure(RejectlabError):
    """At least one verification check failed"""

    def __init__(self, report):
        self.report = report
        failed = [check.name for check in report.checks if not check.passed]
        super().__init__(f"verification failed: {', '.join(failed) or 'no trials'}")
