"""Confusion-matrix metrics for project-level license detection.

A project is a positive prediction when the P2L map has at least one row
for it. Ground truth comes from a CSV with header ``project_id,has_license``
(an optional ``license_id`` column is accepted and ignored).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Mapping

from licmap.p2l import P2LRecord

_TRUE = {"1", "true", "yes", "y", "t"}
_FALSE = {"0", "false", "no", "n", "f"}


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int
    # Predicted projects absent from the truth file; not part of the matrix.
    ignored: int = 0

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.fn, self.tn, self.ignored) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class MetricSet:
    """Fractions in [0, 1]; ``None`` where the denominator is zero."""

    accuracy: float
    precision: float | None
    recall: float | None
    f1: float | None

    def as_dict(self) -> dict[str, float | None]:
        return {"accuracy": self.accuracy, "precision": self.precision, "recall": self.recall, "f1": self.f1}


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def compute_metrics(c: ConfusionCounts) -> MetricSet:
    if c.total == 0:
        raise ValueError("all confusion counts are zero")
    precision = _ratio(c.tp, c.tp + c.fp)
    recall = _ratio(c.tp, c.tp + c.fn)
    # Harmonic mean of precision and recall, written in counts; undefined
    # when either is undefined or both are zero.
    f1 = _ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn) if precision and recall else None
    return MetricSet((c.tp + c.tn) / c.total, precision, recall, f1)


def percent(value: float | None, places: int = 2) -> str:
    """``value`` as a percentage rounded half away from zero; ``n/a`` for undefined."""
    if value is None:
        return "n/a"
    q = Decimal(1).scaleb(-places)
    return str((Decimal(repr(value)) * 100).quantize(q, rounding=ROUND_HALF_UP))


def format_report(c: ConfusionCounts, m: MetricSet, kv: bool = False) -> str:
    if kv:
        lines = [f"{name}={getattr(c, name)}" for name in ("tp", "fp", "fn", "tn", "ignored")]
        lines += [f"{name}={percent(v)}" for name, v in m.as_dict().items()]
        return "\n".join(lines) + "\n"
    lines = [
        f"{'':<12} {'License':>8} {'No License':>10}",
        f"{'Matched':<12} {c.tp:>8} {c.fp:>10}",
        f"{'Not Matched':<12} {c.fn:>8} {c.tn:>10}",
        "",
        f"Accuracy   {percent(m.accuracy):>7}%",
        f"Precision  {percent(m.precision):>7}%",
        f"Recall     {percent(m.recall):>7}%",
        f"F1 Score   {percent(m.f1):>7}%",
    ]
    if c.ignored:
        lines.append(f"(predicted projects missing from truth: {c.ignored})")
    return "\n".join(lines) + "\n"


def parse_truth(text: str) -> dict[str, bool]:
    """Read ``project_id,has_license`` rows; duplicate project ids are an error."""
    reader = csv.DictReader(io.StringIO(text))
    fields = [f.strip() for f in reader.fieldnames or []]
    if "project_id" not in fields or "has_license" not in fields:
        raise ValueError("truth header must include project_id and has_license")
    reader.fieldnames = fields
    truth: dict[str, bool] = {}
    for row in reader:
        pid = (row["project_id"] or "").strip()
        if not pid:
            continue
        flag = (row["has_license"] or "").strip().lower()
        if flag in _TRUE:
            value = True
        elif flag in _FALSE:
            value = False
        else:
            raise ValueError(f"line {reader.line_num}: has_license {flag!r} is not a boolean")
        if pid in truth:
            raise ValueError(f"line {reader.line_num}: duplicate project id {pid!r}")
        truth[pid] = value
    return truth


def compare_against_truth(predicted: Iterable[P2LRecord], truth: Mapping[str, bool]) -> ConfusionCounts:
    positive = {r.project_id for r in predicted}
    tp = fp = fn = tn = 0
    for pid, has_license in truth.items():
        hit = pid in positive
        if hit and has_license:
            tp += 1
        elif hit:
            fp += 1
        elif has_license:
            fn += 1
        else:
            tn += 1
    return ConfusionCounts(tp, fp, fn, tn, ignored=len(positive - truth.keys()))
