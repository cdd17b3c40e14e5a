"""Sweep k-gram size and window over the bundled SPDX texts.

For each (k, w) prints how many pairs of licenses with different token
streams end up with identical fingerprint sets (such pairs cannot
self-match unambiguously), plus the mean signature count per license.

    python scripts/calibrate_window.py --k 1 2 3 4 --w 4 5 6 8
"""

from __future__ import annotations

import argparse
import gzip
import json
import sys
from collections import defaultdict
from pathlib import Path

from licmap.fingerprint import normalize, winnow

SNAPSHOT = Path(__file__).resolve().parent.parent / "tests" / "data" / "spdx-full.json.gz"


def collisions(streams: dict[str, tuple[str, ...]], k: int, w: int) -> tuple[int, float]:
    groups: dict[frozenset[int], set[tuple[str, ...]]] = defaultdict(set)
    total = 0
    for tokens in set(streams.values()):
        sigs = winnow(tokens, k, w).signatures
        total += len(sigs)
        groups[sigs].add(tokens)
    pairs = sum(len(g) * (len(g) - 1) // 2 for g in groups.values())
    return pairs, total / max(1, len(set(streams.values())))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", type=int, nargs="+", default=[1, 2, 3, 4])
    ap.add_argument("--w", type=int, nargs="+", default=[4, 5, 6, 8, 10])
    args = ap.parse_args(argv)

    with gzip.open(SNAPSHOT, "rt", encoding="utf-8") as fh:
        data = json.load(fh)
    streams = {lid: tuple(normalize(rec["licenseText"])) for lid, rec in data.items()}
    print(f"{len(streams)} licenses, {len(set(streams.values()))} distinct token streams")
    print(f"{'k':>3} {'w':>3} {'collisions':>10} {'mean sigs':>10}")
    for k in args.k:
        for w in args.w:
            pairs, mean = collisions(streams, k, w)
            print(f"{k:>3} {w:>3} {pairs:>10} {mean:>10.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
