"""CSV tables and JSON reports with fixed, byte-stable formatting"""

import csv
import hashlib
import io
import json
import sys
from pathlib import Path

import numpy as np
from pydantic import BaseModel

SWEEP_COLUMNS = ("tau", "kappa", "rejection_rate", "selective_risk", "n_rejected", "mask_hash")
CURVE_COLUMNS = ("coverage", "selective_risk", "selective_risk_normalized", "tau")
AGREEMENT_COLUMNS = (
    "tau",
    "tau_marginal",
    "kappa",
    "both",
    "only_marginal",
    "only_joint",
    "neither",
    "ratio_violations",
    "divergence_violations",
)


def mask_hash(mask) -> str:
    """Identical masks hash identically"""
    packed = np.packbits(np.asarray(mask, dtype=bool)).tobytes()
    return hashlib.sha256(packed + len(mask).to_bytes(4, "little")).hexdigest()[:16]


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_csv(rows, columns) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        record = row.model_dump() if isinstance(row, BaseModel) else row
        writer.writerow([_cell(record[column]) for column in columns])
    return buffer.getvalue()


def render_json(model: BaseModel) -> str:
    return json.dumps(model.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"


def emit(text: str, path=None) -> None:
    """Write to path, or stdout when no path is given"""
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8", newline="\n")


def write_csv(rows, columns, path=None) -> str:
    text = render_csv(rows, columns)
    emit(text, path)
    return text


def write_report(report: BaseModel, path=None) -> str:
    text = render_json(report)
    emit(text, path)
    return text
