"""Project-to-license rows and their semicolon-separated file format.

Each row reads ``Project_ID;License;Commit_Time`` where the time is a UTC
``YYYY-MM`` month, ``invalid``, or ``latest``. The merged format appends
the detection method (``1-WoC`` or ``2-SH``) as a fourth field. Files are
UTF-8 with LF line endings and rows sorted for byte-reproducibility.

External detections are read from a CSV or TSV file whose header names
``blob_hash``, ``license_id`` and ``confidence`` (a fraction in [0, 1]).
"""

from __future__ import annotations

import csv
import io
import logging
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from licmap.gitscan import INVALID, BlobRecord
from licmap.matcher import Matched

log = logging.getLogger(__name__)

LATEST = "latest"
METHOD_WOC = "1-WoC"
METHOD_SH = "2-SH"
METHODS = (METHOD_WOC, METHOD_SH)
DEFAULT_MIN_CONFIDENCE = 0.95

_MONTH_RE = re.compile(r"\d{4}-(0[1-9]|1[0-2])")
_FORBIDDEN = (";", "\n", "\r")


class P2LError(ValueError):
    """A row or file that does not satisfy the P2L format."""


def is_time_token(token: str) -> bool:
    return token in (LATEST, INVALID) or _MONTH_RE.fullmatch(token) is not None


@dataclass(frozen=True, order=True)
class P2LRecord:
    project_id: str
    license_id: str
    commit_time: str
    method: str = METHOD_WOC

    def __post_init__(self) -> None:
        for name in ("project_id", "license_id"):
            value = getattr(self, name)
            if not isinstance(value, str) or not value:
                raise P2LError(f"{name} must be a non-empty string")
            if any(c in value for c in _FORBIDDEN):
                raise P2LError(f"{name} {value!r} contains ';' or a line break")
        if not is_time_token(self.commit_time):
            raise P2LError(f"bad commit time {self.commit_time!r}")
        if self.method not in METHODS:
            raise P2LError(f"unknown method {self.method!r}")

    def fields(self, include_method: bool) -> tuple[str, ...]:
        base = (self.project_id, self.license_id, self.commit_time)
        return base + (self.method,) if include_method else base


def build_records(
    blobs: Iterable[tuple[BlobRecord, Matched | str]],
    method: str = METHOD_WOC,
) -> list[P2LRecord]:
    """Rows for blobs paired with their matched license.

    Each (project, license) gets a row per commit month it was committed
    in, plus ``latest`` when any such blob is in the head tree.
    """
    rows: set[P2LRecord] = set()
    for blob, match in blobs:
        if isinstance(match, Matched):
            license_id = match.license_id
        elif isinstance(match, str):
            license_id = match
        else:
            raise TypeError(f"blob {blob.blob_hash} is not Matched: {match!r}")
        for month in blob.commit_months:
            rows.add(P2LRecord(blob.project_id, license_id, month, method))
        if blob.in_latest:
            rows.add(P2LRecord(blob.project_id, license_id, LATEST, method))
    return sorted(rows)


@dataclass(frozen=True)
class ExternalDetection:
    blob_hash: str
    license_id: str
    confidence: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")


@dataclass
class IngestStats:
    read: int = 0
    malformed: int = 0
    below_confidence: int = 0
    absent: int = 0
    kept: int = 0
    malformed_lines: list[int] = field(default_factory=list)


def parse_external(text: str, stats: IngestStats | None = None) -> list[ExternalDetection]:
    """Parse a detections table; the delimiter is a tab if the header has one, else a comma."""
    stats = stats if stats is not None else IngestStats()
    lines = text.splitlines()
    if not lines:
        return []
    delimiter = "\t" if "\t" in lines[0] else ","
    reader = csv.reader(io.StringIO(text), delimiter=delimiter)
    header = [h.strip().lower() for h in next(reader)]
    try:
        cols = [header.index(c) for c in ("blob_hash", "license_id", "confidence")]
    except ValueError as exc:
        raise P2LError(f"detections header {header} lacks blob_hash/license_id/confidence") from exc

    out = []
    for row in reader:
        if not any(cell.strip() for cell in row):
            continue
        stats.read += 1
        try:
            blob, lic, conf = (row[i].strip() for i in cols)
            if not blob or not lic:
                raise ValueError("empty field")
            out.append(ExternalDetection(blob.lower(), lic, float(conf)))
        except (IndexError, ValueError) as exc:
            stats.malformed += 1
            stats.malformed_lines.append(reader.line_num)
            log.warning("detections line %d skipped: %s", reader.line_num, exc)
    return out


def ingest_external(
    detections: Iterable[ExternalDetection],
    blob_index: Mapping[str, Sequence[BlobRecord]],
    min_confidence: float = DEFAULT_MIN_CONFIDENCE,
    stats: IngestStats | None = None,
) -> list[P2LRecord]:
    """Rows tagged ``2-SH`` for confident detections of blobs seen in the scanned repositories."""
    stats = stats if stats is not None else IngestStats()
    pairs = []
    for d in detections:
        if d.confidence < min_confidence:
            stats.below_confidence += 1
            continue
        occurrences = blob_index.get(d.blob_hash)
        if not occurrences:
            stats.absent += 1
            continue
        stats.kept += 1
        pairs.extend((blob, d.license_id) for blob in occurrences)
    return build_records(pairs, method=METHOD_SH)


def merge_records(a: Iterable[P2LRecord], b: Iterable[P2LRecord]) -> list[P2LRecord]:
    """Sorted union; rows differing only in method are distinct."""
    return sorted(set(a) | set(b))


def emit(records: Iterable[P2LRecord], include_method: bool = False) -> bytes:
    rows = sorted(set(r.fields(include_method) for r in records))
    return "".join(";".join(row) + "\n" for row in rows).encode("utf-8")


def parse(data: bytes | str, default_method: str = METHOD_WOC) -> list[P2LRecord]:
    """Read a P2L file in the three- or four-field format.

    Three-field rows take ``default_method``. Errors name the 1-based line.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise P2LError(f"not UTF-8: {exc}") from exc
    records = []
    for lineno, line in enumerate(data.split("\n"), start=1):
        if not line:
            continue
        parts = line.split(";")
        if len(parts) == 3:
            parts.append(default_method)
        if len(parts) != 4:
            raise P2LError(f"line {lineno}: expected 3 or 4 ';'-separated fields, got {len(parts)}")
        try:
            records.append(P2LRecord(*parts))
        except P2LError as exc:
            raise P2LError(f"line {lineno}: {exc}") from None
    return records
