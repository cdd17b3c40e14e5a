"""Batch matching and the repository-to-P2L pipeline.

Matching fans out over a process pool when ``jobs > 1``; every result is
keyed by blob hash or input order, so output never depends on the
degree of parallelism.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from licmap.corpus import Corpus
from licmap.fingerprint import fingerprint
from licmap.gitscan import BlobRecord, GitError, ScanConfig, default_project_id, read_blobs, scan_repo
from licmap.matcher import DEFAULT_THRESHOLD, BucketReport, Matched, Outcome, best_match, bucket_report, classify
from licmap.p2l import P2LRecord, build_records

log = logging.getLogger(__name__)

_worker_corpus: Corpus | None = None


def _init_worker(corpus: Corpus) -> None:
    global _worker_corpus
    _worker_corpus = corpus


def _match_one(args: tuple[bytes, float]) -> Outcome:
    data, threshold = args
    corpus = _worker_corpus
    assert corpus is not None
    return classify(best_match(fingerprint(data, corpus.k, corpus.w), corpus), threshold)


def match_texts(
    texts: Sequence[bytes],
    corpus: Corpus,
    threshold: float = DEFAULT_THRESHOLD,
    jobs: int = 1,
) -> list[Outcome]:
    """Classified best match of each text, in input order."""
    work = [(t, threshold) for t in texts]
    if jobs > 1 and len(work) > 1:
        chunk = max(1, len(work) // (jobs * 8))
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=(corpus,)) as pool:
            return list(pool.map(_match_one, work, chunksize=chunk))
    _init_worker(corpus)
    return [_match_one(a) for a in work]


@dataclass
class ScanResult:
    records: list[P2LRecord] = field(default_factory=list)
    blobs: list[BlobRecord] = field(default_factory=list)
    outcomes: dict[str, Outcome] = field(default_factory=dict)
    failures: dict[str, str] = field(default_factory=dict)

    @property
    def report(self) -> BucketReport:
        return bucket_report(self.outcomes[h] for h in sorted(self.outcomes))


def scan_repos(
    repos: Sequence[str | os.PathLike],
    corpus: Corpus,
    cfg: ScanConfig = ScanConfig(),
    scan_time: int | None = None,
    threshold: float = DEFAULT_THRESHOLD,
    jobs: int = 1,
    project_ids: Sequence[str] | None = None,
) -> ScanResult:
    """Scan, match and map every repository; failed repositories are reported, not fatal."""
    if project_ids is not None and len(project_ids) != len(repos):
        raise ValueError("need one project id per repository")
    ids = list(project_ids) if project_ids is not None else [default_project_id(r) for r in repos]

    def scan(i: int):
        try:
            blobs = scan_repo(repos[i], cfg, scan_time, ids[i])
            return i, blobs, read_blobs(repos[i], [b.blob_hash for b in blobs]), None
        except GitError as exc:
            return i, [], {}, str(exc)

    result = ScanResult()
    contents: dict[str, bytes] = {}
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        scanned = sorted(pool.map(scan, range(len(repos))), key=lambda t: t[0])
    for i, blobs, data, err in scanned:
        if err is not None:
            log.error("%s", err)
            result.failures[os.fspath(repos[i])] = err
            continue
        result.blobs.extend(blobs)
        for h, d in data.items():
            contents.setdefault(h, d)

    hashes = sorted(contents)
    outcomes = match_texts([contents[h] for h in hashes], corpus, threshold, jobs)
    result.outcomes = dict(zip(hashes, outcomes))
    pairs = [
        (b, result.outcomes[b.blob_hash])
        for b in result.blobs
        if isinstance(result.outcomes.get(b.blob_hash), Matched)
    ]
    result.records = build_records(pairs)
    return result
