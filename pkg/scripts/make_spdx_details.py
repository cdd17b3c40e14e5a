"""Write an SPDX license-list-data style json/details/ tree from a bundled snapshot.

The snapshot is the ``spdx-full.json`` file of the ``spdx-license-list``
npm package (CC0): a mapping of license id to name, url, osiApproved and
licenseText. Each id becomes ``<out>/json/details/<id>.json`` with the
licenseId/name/licenseText fields the corpus loader reads.

    python scripts/make_spdx_details.py tests/data/spdx-full.json.gz /tmp/license-list-data
    python scripts/make_spdx_details.py snapshot.json out/ --osi out/osi.json
"""

import argparse
import gzip
import json
from pathlib import Path


def read_snapshot(path):
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "rt", encoding="utf-8") as fh:
        return json.load(fh)


def write_details(snapshot, out):
    details = Path(out) / "json" / "details"
    details.mkdir(parents=True, exist_ok=True)
    for lid, rec in sorted(snapshot.items()):
        record = {
            "licenseId": lid,
            "name": rec.get("name", lid),
            "licenseText": rec.get("licenseText", ""),
            "isOsiApproved": str(rec.get("osiApproved")).lower() == "true",
            "seeAlso": [rec["url"]] if rec.get("url") else [],
        }
        (details / f"{lid}.json").write_text(json.dumps(record, indent=2), encoding="utf-8")
    return details


def write_osi(snapshot, path):
    """OSI-style export (id, name, embedded text) of the OSI-approved subset."""
    records = [
        {"id": lid, "name": rec.get("name", lid), "text": rec.get("licenseText", "")}
        for lid, rec in sorted(snapshot.items())
        if str(rec.get("osiApproved")).lower() == "true"
    ]
    Path(path).write_text(json.dumps(records, indent=1), encoding="utf-8")
    return len(records)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("snapshot")
    ap.add_argument("out")
    ap.add_argument("--osi", help="also write an OSI-style export of the OSI-approved subset")
    args = ap.parse_args()
    snapshot = read_snapshot(args.snapshot)
    details = write_details(snapshot, args.out)
    print(f"{len(snapshot)} records -> {details}")
    if args.osi:
        print(f"{write_osi(snapshot, args.osi)} OSI records -> {args.osi}")


if __name__ == "__main__":
    main()
