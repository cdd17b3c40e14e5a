"""Winnowing-based license identification and project-to-license maps."""

from licmap.corpus import Corpus, LicenseEntry, load_osi, load_plain, load_spdx, merge_corpora
from licmap.fingerprint import FingerprintSet, fingerprint, hash_token, normalize, winnow
from licmap.gitscan import BlobRecord, ScanConfig, month_of, scan_repo
from licmap.matcher import BelowThreshold, Matched, MatchResult, NoMatch, best_match, bucket_report, classify, score
from licmap.metrics import ConfusionCounts, MetricSet, compare_against_truth, compute_metrics
from licmap.p2l import P2LRecord, build_records, emit, ingest_external, merge_records

__version__ = "0.1.0"

__all__ = [
    "Corpus",
    "LicenseEntry",
    "load_osi",
    "load_plain",
    "load_spdx",
    "merge_corpora",
    "FingerprintSet",
    "fingerprint",
    "hash_token",
    "normalize",
    "winnow",
    "BlobRecord",
    "ScanConfig",
    "month_of",
    "scan_repo",
    "BelowThreshold",
    "Matched",
    "MatchResult",
    "NoMatch",
    "best_match",
    "bucket_report",
    "classify",
    "score",
    "ConfusionCounts",
    "MetricSet",
    "compare_against_truth",
    "compute_metrics",
    "P2LRecord",
    "build_records",
    "emit",
    "ingest_external",
    "merge_records",
]
