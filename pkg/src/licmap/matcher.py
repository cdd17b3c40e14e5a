"""Scoring candidate blobs against a license corpus.

The score of two fingerprint sets is the number of shared signatures over
the number of distinct signatures in their union. A blob's best match is
the corpus license with the highest score; a blob sharing no signature
with any license is unmatched.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import chain
from typing import AbstractSet, Iterable, Union

from licmap.corpus import Corpus
from licmap.fingerprint import FingerprintSet

DEFAULT_THRESHOLD = 0.85

# Right-closed score intervals reported per bucket, labelled as printed.
BUCKET_EDGES = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
BUCKET_LABELS = (
    "S <= 0.2",
    "0.2 < S <= 0.4",
    "0.4 < S <= 0.6",
    "0.6 < S <= 0.8",
    "0.8 < S <= 1",
)
# Finer split of the top bucket, used for the signature-count strata.
TOP_EDGES = (0.8, 0.85, 0.9, 0.95, 1.0)
TOP_LABELS = ("80-85", "85-90", "90-95", "95-100")
SIGNATURE_STRATUM = 100


def _sigs(s: FingerprintSet | AbstractSet[int]) -> AbstractSet[int]:
    return s.signatures if isinstance(s, FingerprintSet) else s


def score(a: FingerprintSet | AbstractSet[int], b: FingerprintSet | AbstractSet[int]) -> float:
    """Shared signatures over distinct signatures in either set; 0 for two empty sets."""
    a, b = _sigs(a), _sigs(b)
    shared = len(a & b)
    union = len(a) + len(b) - shared
    return shared / union if union else 0.0


@dataclass(frozen=True)
class MatchResult:
    license_id: str
    score: float
    shared: int
    union_count: int
    blob_signature_count: int
    license_signature_count: int

    @property
    def contains_license(self) -> bool:
        """Every license signature is in the blob, yet the blob has extra text."""
        return self.shared == self.license_signature_count and self.score < 1.0


@dataclass(frozen=True)
class NoMatch:
    blob_signature_count: int = 0


@dataclass(frozen=True)
class Matched:
    result: MatchResult

    @property
    def license_id(self) -> str:
        return self.result.license_id

    @property
    def score(self) -> float:
        return self.result.score


@dataclass(frozen=True)
class BelowThreshold:
    result: MatchResult

    @property
    def license_id(self) -> str:
        return self.result.license_id

    @property
    def score(self) -> float:
        return self.result.score


Outcome = Union[Matched, BelowThreshold, NoMatch]


def best_match(
    blob: FingerprintSet | AbstractSet[int],
    corpus: Corpus,
    exhaustive: bool = False,
) -> MatchResult | NoMatch:
    """Highest-scoring corpus license for ``blob``.

    Ties go to the larger shared count, then the smallest license id. With
    ``exhaustive`` every entry is scored; otherwise only entries reached
    through the corpus's signature index are, which gives the same answer.
    """
    if len(corpus) == 0:
        raise ValueError("cannot match against an empty corpus")
    sigs = _sigs(blob)
    n_blob = len(sigs)
    entries = corpus.entries

    if exhaustive:
        counts = {pos: len(sigs & e.fingerprints.signatures) for pos, e in enumerate(entries)}
    else:
        index = corpus.index
        counts = Counter(chain.from_iterable(index.get(sig, ()) for sig in sigs))

    # Exact comparison of shared/union by cross-multiplication.
    best_pos, best_shared, best_union, best_id = -1, 0, 1, ""
    for pos, shared in counts.items():
        if shared == 0:
            continue
        union = n_blob + entries[pos].fingerprints.size - shared
        lhs, rhs = shared * best_union, best_shared * union
        lid = entries[pos].license_id
        if best_pos < 0 or lhs > rhs or (lhs == rhs and (-shared, lid) < (-best_shared, best_id)):
            best_pos, best_shared, best_union, best_id = pos, shared, union, lid
    if best_pos < 0:
        return NoMatch(n_blob)

    entry = entries[best_pos]
    shared, union = best_shared, best_union
    return MatchResult(
        license_id=entry.license_id,
        score=shared / union,
        shared=shared,
        union_count=union,
        blob_signature_count=n_blob,
        license_signature_count=entry.fingerprints.size,
    )


def classify(m: MatchResult | NoMatch, threshold: float = DEFAULT_THRESHOLD) -> Outcome:
    """Matched when the score reaches ``threshold`` (inclusive)."""
    if not 0 < threshold <= 1:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    if isinstance(m, NoMatch):
        return m
    return Matched(m) if m.score >= threshold else BelowThreshold(m)


def bucket_index(s: float, edges: tuple[float, ...] = BUCKET_EDGES) -> int:
    """Index of the right-closed interval containing ``s`` (``s > edges[0]``)."""
    for i in range(1, len(edges)):
        if s <= edges[i]:
            return i - 1
    return len(edges) - 2


def _zeros(labels: tuple[str, ...]) -> dict[str, int]:
    return {label: 0 for label in labels}


@dataclass
class BucketReport:
    """Tally of matching outcomes by score interval.

    ``matched`` counts blobs sharing at least one signature with a license;
    ``accepted`` those whose best score met the threshold. ``strata`` splits
    the top bucket by blob signature count (``<=100`` / ``>100``).
    """

    buckets: dict[str, int] = field(default_factory=lambda: _zeros(BUCKET_LABELS))
    unmatched: int = 0
    no_signatures: int = 0
    accepted: int = 0
    contains_license: int = 0
    strata: dict[str, dict[str, int]] = field(
        default_factory=lambda: {"<=100": _zeros(BUCKET_LABELS), ">100": _zeros(BUCKET_LABELS)}
    )
    top_strata: dict[str, dict[str, int]] = field(
        default_factory=lambda: {"<=100": _zeros(TOP_LABELS), ">100": _zeros(TOP_LABELS)}
    )

    @property
    def matched(self) -> int:
        return sum(self.buckets.values())

    @property
    def winnowed(self) -> int:
        return self.matched + self.unmatched

    @property
    def total(self) -> int:
        return self.winnowed + self.no_signatures

    def add(self, outcome: Outcome) -> None:
        if isinstance(outcome, NoMatch):
            if outcome.blob_signature_count == 0:
                self.no_signatures += 1
            else:
                self.unmatched += 1
            return
        r = outcome.result
        if r.score <= 0:
            self.unmatched += 1
            return
        label = BUCKET_LABELS[bucket_index(r.score)]
        stratum = "<=100" if r.blob_signature_count <= SIGNATURE_STRATUM else ">100"
        self.buckets[label] += 1
        self.strata[stratum][label] += 1
        if r.score > TOP_EDGES[0]:
            self.top_strata[stratum][TOP_LABELS[bucket_index(r.score, TOP_EDGES)]] += 1
        if isinstance(outcome, Matched):
            self.accepted += 1
        if r.contains_license:
            self.contains_license += 1

    def to_kv(self) -> str:
        lines = [
            f"total={self.total}",
            f"winnowed={self.winnowed}",
            f"matched={self.matched}",
            f"unmatched={self.unmatched}",
            f"no_signatures={self.no_signatures}",
            f"accepted={self.accepted}",
            f"contains_license={self.contains_license}",
        ]
        for i, label in enumerate(BUCKET_LABELS):
            lo, hi = BUCKET_EDGES[i], BUCKET_EDGES[i + 1]
            lines.append(f"bucket_{lo:.1f}_{hi:.1f}={self.buckets[label]}")
            for stratum in ("<=100", ">100"):
                tag = "le100" if stratum == "<=100" else "gt100"
                lines.append(f"bucket_{lo:.1f}_{hi:.1f}_{tag}={self.strata[stratum][label]}")
        for stratum in ("<=100", ">100"):
            tag = "le100" if stratum == "<=100" else "gt100"
            for label in TOP_LABELS:
                lines.append(f"top_{label}_{tag}={self.top_strata[stratum][label]}")
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        def pct(n: int, d: int) -> str:
            return f"{100 * n / d:.1f}%" if d else "-"

        rows = [
            ("Potential Blobs", self.total, pct(self.total, self.total), "", pct(self.total, self.total)),
            ("Winnowing", self.winnowed, pct(self.winnowed, self.total), "(Potential Blobs)", pct(self.winnowed, self.total)),
            ("Matched", self.matched, pct(self.matched, self.winnowed), "(Winnowing)", pct(self.matched, self.total)),
        ]
        for label in BUCKET_LABELS:
            n = self.buckets[label]
            rows.append((label, n, pct(n, self.matched), "(Matched)", pct(n, self.total)))
        out = [f"{'':<16} {'Count':>10} {'Relative':>8} {'':<17} {'Overall':>8}"]
        for name, n, rel, rel_to, overall in rows:
            out.append(f"{name:<16} {n:>10} {rel:>8} {rel_to:<17} {overall:>8}")
        out.append("")
        out.append(f"Unmatched (no shared signature): {self.unmatched}")
        out.append(f"No signatures: {self.no_signatures}")
        out.append(f"Accepted at threshold: {self.accepted}")
        out.append(f"Score < 1 with whole license contained: {self.contains_license}")
        out.append("")
        out.append(f"{'Signatures':<11} {'Score':<7} {'Count':>10}")
        for stratum in ("<=100", ">100"):
            for label in TOP_LABELS:
                out.append(f"{stratum:<11} {label:<7} {self.top_strata[stratum][label]:>10}")
        return "\n".join(out) + "\n"


def bucket_report(outcomes: Iterable[Outcome]) -> BucketReport:
    report = BucketReport()
    for o in outcomes:
        report.add(o)
    return report
