"""Match a synthetic blob population against a corpus and print the bucket report.

    python scripts/synthetic_benchmark.py --corpus corpus.jsonl -n 10000 --jobs 4

Without --corpus the bundled SPDX snapshot in tests/data is fingerprinted first.
"""

from __future__ import annotations

import argparse
import gzip
import json
import sys
import tempfile
import time
from pathlib import Path

from licmap.corpus import load_cache, load_spdx
from licmap.matcher import DEFAULT_THRESHOLD, bucket_report
from licmap.pipeline import match_texts
from licmap.synthetic import synthetic_blobs

SNAPSHOT = Path(__file__).resolve().parent.parent / "tests" / "data" / "spdx-full.json.gz"


def snapshot_corpus():
    with gzip.open(SNAPSHOT, "rt", encoding="utf-8") as fh:
        data = json.load(fh)
    with tempfile.TemporaryDirectory() as tmp:
        for lid, rec in data.items():
            record = {"licenseId": lid, "name": rec["name"], "licenseText": rec["licenseText"]}
            (Path(tmp) / f"{lid}.json").write_text(json.dumps(record), encoding="utf-8")
        return load_spdx(tmp)


def run(corpus, n: int, seed: int, jobs: int, threshold: float = DEFAULT_THRESHOLD):
    blobs = synthetic_blobs([e.text for e in corpus], n, seed)
    start = time.perf_counter()
    outcomes = match_texts(blobs, corpus, threshold, jobs)
    elapsed = time.perf_counter() - start
    return bucket_report(outcomes), elapsed


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--corpus", help="corpus cache from `licmap corpus-build`")
    ap.add_argument("-n", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--format", choices=("text", "kv"), default="text")
    args = ap.parse_args(argv)

    corpus = load_cache(args.corpus) if args.corpus else snapshot_corpus()
    report, elapsed = run(corpus, args.n, args.seed, args.jobs)
    sys.stdout.write(report.to_kv() if args.format == "kv" else report.to_text())
    print(
        f"\n{args.n} blobs against {len(corpus)} licenses in {elapsed:.2f} s "
        f"({args.n / elapsed:.0f} blobs/s, jobs={args.jobs})"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
