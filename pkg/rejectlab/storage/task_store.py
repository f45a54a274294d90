"""Task and rejector-record files (JSON).

Task schema, one object:
    n_inputs          int >= 1
    n_labels          int >= 2
    marginal          [n_inputs] floats, strictly positive, summing to 1
    bayes_posterior   [n_inputs][n_labels] floats, rows summing to 1
    logits            [n_inputs][n_labels] finite floats
Floats are written in shortest round-trip form, so write -> read -> write
reproduces the file byte for byte.
"""

import hashlib
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from rejectlab.errors import InvalidInputError
from rejectlab.models.task import FiniteDomain, FiniteTask, Logits, PosteriorField, ProbVector


class TaskFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_inputs: int
    n_labels: int
    marginal: list[float]
    bayes_posterior: list[list[float]]
    logits: list[list[float]]

    @classmethod
    def from_task(cls, task: FiniteTask) -> "TaskFile":
        return cls(
            n_inputs=task.n_inputs,
            n_labels=task.n_labels,
            marginal=list(task.marginal.weights),
            bayes_posterior=[list(row) for row in task.bayes_posterior.rows],
            logits=[list(row) for row in task.logits.values],
        )

    def to_task(self) -> FiniteTask:
        return FiniteTask(
            domain=FiniteDomain(n_inputs=self.n_inputs, n_labels=self.n_labels),
            marginal=ProbVector(weights=tuple(self.marginal)),
            bayes_posterior=PosteriorField(rows=tuple(map(tuple, self.bayes_posterior))),
            logits=Logits(values=tuple(map(tuple, self.logits))),
        )


class RejectorRecord(BaseModel):
    """A rejection mask with what produced it.

    scale is "ratio" (tau), "divergence" (kappa) or "cost" (Chow's c);
    normalizer is Z or Z_j, absent for Chow's rule.
    """

    model_config = ConfigDict(populate_by_name=True)

    mask: list[int]
    kind: str
    loss: str
    lambda_: Optional[float] = Field(default=None, alias="lambda")
    tau_or_kappa: float
    scale: str
    normalizer: Optional[float] = None


def dumps_task(task: FiniteTask) -> str:
    return TaskFile.from_task(task).model_dump_json(indent=2) + "\n"


def loads_task(text: str) -> FiniteTask:
    try:
        return TaskFile.model_validate_json(text).to_task()
    except ValidationError as exc:
        raise InvalidInputError(f"invalid task file: {exc}") from exc


def write_task(task: FiniteTask, path) -> Path:
    path = Path(path)
    path.write_text(dumps_task(task), encoding="utf-8")
    return path


def read_task(path) -> FiniteTask:
    path = Path(path)
    if not path.is_file():
        raise InvalidInputError(f"task file not found: {path}")
    return loads_task(path.read_text(encoding="utf-8"))


def fingerprint(task: FiniteTask) -> str:
    """First 16 hex digits of the SHA-256 of the serialized task"""
    return hashlib.sha256(dumps_task(task).encode("utf-8")).hexdigest()[:16]


def write_rejector(record: RejectorRecord, path=None) -> str:
    text = record.model_dump_json(indent=2, by_alias=True) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
