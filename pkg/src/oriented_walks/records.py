"""Result rows and their CSV / JSON serialisation."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

RECORD_COLUMNS = (
    "estimator_id", "law", "params_json", "n", "reps", "value", "stderr", "seed", "extra_json",
)


def _plain(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, no whitespace, shortest float repr."""
    return json.dumps(_plain(obj), sort_keys=True, separators=(",", ":"))


def fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(_plain(value))


@dataclass
class EstimateRecord:
    """One estimate with its Monte Carlo standard error and provenance."""

    estimator_id: str
    law: str
    params: dict
    n: int
    replicates: int
    value: float
    stderr: float
    seed: int
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if not (self.stderr >= 0 or math.isnan(self.stderr)):
            raise ValueError("stderr must be nonnegative")

    def row(self) -> list[str]:
        return [
            self.estimator_id, self.law, dumps(self.params), str(int(self.n)),
            str(int(self.replicates)), fmt(self.value), fmt(self.stderr),
            str(int(self.seed)), dumps(self.extra),
        ]

    def as_dict(self) -> dict:
        return {
            "estimator_id": self.estimator_id, "law": self.law, "params": _plain(self.params),
            "n": int(self.n), "reps": int(self.replicates), "value": float(self.value),
            "stderr": float(self.stderr), "seed": int(self.seed), "extra": _plain(self.extra),
        }

    def sort_key(self):
        return (self.estimator_id, int(self.n), self.extra.get("lag", 0))


def mean_record(estimator_id, values, *, law="", params=None, n=0, seed=0, extra=None):
    """Sample mean of ``values`` with its normal-approximation standard error."""
    values = np.asarray(values, dtype=float)
    reps = values.size
    se = float(values.std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
    return EstimateRecord(estimator_id, law, dict(params or {}), n, reps,
                          float(values.mean()), se, seed, dict(extra or {}))


def variance_with_stderr(values) -> tuple[float, float]:
    """Unbiased sample variance and its large-sample standard error.

    Uses ``Var(s^2) ~ (mu4 - sigma^4) / N``.
    """
    x = np.asarray(values, dtype=float)
    n = x.size
    d = x - x.mean()
    var = float(d @ d / (n - 1))
    m4 = float(np.mean(d ** 4))
    return var, math.sqrt(max(m4 - var * var, 0.0) / n)


@dataclass
class ResultSet:
    """Header metadata plus a deterministic table of rows.

    ``columns`` / ``rows`` hold the rendered table. Header fields are written
    as ``#`` comment lines so that the data rows stay byte-stable across runs.
    """

    header: dict
    columns: Sequence[str]
    rows: list[list[str]]
    records: list[Any] = field(default_factory=list)
    exit_code: int = 0

    @classmethod
    def from_records(cls, header, records: list[EstimateRecord], exit_code=0):
        records = sorted(records, key=EstimateRecord.sort_key)
        return cls(header, RECORD_COLUMNS, [r.row() for r in records], records, exit_code)

    def body_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        writer.writerows(self.rows)
        return buf.getvalue()

    def to_csv(self) -> str:
        head = "".join(f"# {k}: {dumps(v) if not isinstance(v, str) else v}\n"
                       for k, v in self.header.items())
        return head + self.body_csv()

    def to_json(self) -> str:
        rows = [r.as_dict() if isinstance(r, EstimateRecord) else r for r in self.records]
        if not rows:
            rows = [dict(zip(self.columns, r)) for r in self.rows]
        return json.dumps({"header": _plain(self.header), "rows": _plain(rows)}, indent=1)
