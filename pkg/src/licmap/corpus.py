"""Known-license corpora loaded from SPDX, OSI, or plain text sources.

A :class:`Corpus` is immutable once built. Every entry is fingerprinted
with the same ``(k, w)``; the cache file stores texts and fingerprints so
the corpus is fingerprinted only once per parameter set and source digest.

Cache file layout (UTF-8 JSON lines)::

    {"format": "licmap-corpus", "version": 1, "k": 1, "w": 8, "skipped": 0, "key": {...}}
    {"license_id": ..., "name": ..., "source": "SPDX", "aliases": [...], "text": ..., "fingerprints": [...]}

The header's ``key`` holds ``k``, ``w`` and a SHA-256 digest per input
source; a cache whose key matches the requested build is reused as is.
    ...
"""

from __future__ import annotations

import enum
import hashlib
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping

from licmap.fingerprint import DEFAULT_K, DEFAULT_W, FingerprintSet, normalize, winnow

log = logging.getLogger(__name__)

CACHE_FORMAT = "licmap-corpus"
CACHE_VERSION = 1


class CorpusError(Exception):
    """Fatal problem building, merging, or reading a corpus."""


class Source(enum.IntEnum):
    """Where an entry came from. Lower value wins text-identity dedup."""

    SPDX = 0
    OSI = 1
    PLAIN = 2


@dataclass(frozen=True)
class LicenseEntry:
    license_id: str
    name: str
    text: str
    fingerprints: FingerprintSet
    source: Source
    aliases: tuple[str, ...] = ()

    @cached_property
    def tokens(self) -> tuple[str, ...]:
        return tuple(normalize(self.text))


@dataclass(frozen=True)
class Corpus:
    entries: tuple[LicenseEntry, ...]
    k: int = DEFAULT_K
    w: int = DEFAULT_W
    skipped: int = 0

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for e in self.entries:
            if not e.license_id:
                raise CorpusError("empty license id")
            if e.license_id in seen:
                raise CorpusError(f"duplicate license id {e.license_id!r}")
            seen.add(e.license_id)

    @property
    def params(self) -> tuple[int, int]:
        return (self.k, self.w)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @cached_property
    def by_id(self) -> dict[str, LicenseEntry]:
        return {e.license_id: e for e in self.entries}

    @cached_property
    def aliases(self) -> dict[str, str]:
        """Absorbed license id -> id of the entry that absorbed it.

        Entry aliases are stored source-qualified (``"OSI:MIT"``); ids
        absorbed into an entry of the same id are not listed here.
        """
        out: dict[str, str] = {}
        for e in self.entries:
            for a in e.aliases:
                lid = a.split(":", 1)[1]
                if lid != e.license_id and lid not in self.by_id:
                    out.setdefault(lid, e.license_id)
        return out

    @cached_property
    def index(self) -> dict[int, tuple[int, ...]]:
        """Signature -> positions in ``entries`` of licenses containing it."""
        inverted: dict[int, list[int]] = {}
        for pos, e in enumerate(self.entries):
            for sig in e.fingerprints.signatures:
                inverted.setdefault(sig, []).append(pos)
        return {sig: tuple(p) for sig, p in inverted.items()}


def _fingerprint_text(args: tuple[str, int, int]) -> frozenset[int]:
    text, k, w = args
    return winnow(normalize(text), k, w).signatures


def _build(
    records: Iterable[tuple[str, str, str]],
    source: Source,
    k: int,
    w: int,
    skipped: int,
    jobs: int,
) -> Corpus:
    """Fingerprint ``(license_id, name, text)`` records into a corpus.

    Records are taken in the given order; a repeated id keeps the first.
    """
    unique: list[tuple[str, str, str]] = []
    seen: set[str] = set()
    for lid, name, text in records:
        if lid in seen:
            log.warning("duplicate license id %r, keeping first", lid)
            skipped += 1
            continue
        seen.add(lid)
        unique.append((lid, name, text))

    work = [(text, k, w) for _, _, text in unique]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            sigs = list(pool.map(_fingerprint_text, work, chunksize=16))
    else:
        sigs = [_fingerprint_text(a) for a in work]

    entries = []
    for (lid, name, text), s in zip(unique, sigs):
        if not s:
            log.warning("license %r has no signatures, skipped", lid)
            skipped += 1
            continue
        entries.append(LicenseEntry(lid, name, text, FingerprintSet(s), source))
    entries.sort(key=lambda e: e.license_id)
    return Corpus(tuple(entries), k, w, skipped)


def _readable_dir(path: Path) -> Path:
    if not path.is_dir() or not os.access(path, os.R_OK | os.X_OK):
        raise CorpusError(f"cannot read license directory {str(path)!r}")
    return path


def _spdx_detail_dir(path: Path) -> Path:
    """Accept either a license-list-data checkout or its json/details dir."""
    _readable_dir(path)
    nested = path / "json" / "details"
    return nested if nested.is_dir() else path


def load_spdx(path: str | os.PathLike, k: int = DEFAULT_K, w: int = DEFAULT_W, jobs: int = 1) -> Corpus:
    """Load SPDX license-list-data JSON detail records (licenseId, name, licenseText)."""
    root = _spdx_detail_dir(Path(path))
    records = []
    skipped = 0
    files = sorted(root.glob("*.json"))
    if not files:
        log.warning("no SPDX detail records under %s", root)
    for f in files:
        try:
            rec = json.loads(f.read_text(encoding="utf-8"))
            lid = rec["licenseId"]
            text = rec.get("licenseText")
        except (OSError, ValueError, KeyError, TypeError) as exc:
            log.warning("malformed SPDX record %s: %s", f.name, exc)
            skipped += 1
            continue
        if not isinstance(lid, str) or not lid or not isinstance(text, str) or not text.strip():
            log.warning("SPDX record %s has no usable licenseId/licenseText, skipped", f.name)
            skipped += 1
            continue
        records.append((lid, str(rec.get("name") or lid), text))
    return _build(records, Source.SPDX, k, w, skipped, jobs)


def _osi_text(rec: Mapping, base: Path) -> str | None:
    for key in ("text", "licenseText"):
        value = rec.get(key)
        if isinstance(value, str) and value.strip():
            return value
    lid = rec.get("id")
    for candidate in (base / f"{lid}.txt", base / "texts" / f"{lid}.txt"):
        if candidate.is_file():
            text = candidate.read_text(encoding="utf-8", errors="replace")
            if text.strip():
                return text
    return None


def load_osi(path: str | os.PathLike, k: int = DEFAULT_K, w: int = DEFAULT_W, jobs: int = 1) -> Corpus:
    """Load an OSI license JSON export.

    Each object needs ``id`` and ``name``. The text is taken from an
    embedded ``text`` string, or from ``<id>.txt`` (or ``texts/<id>.txt``)
    next to the export.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise CorpusError(f"cannot read OSI export {str(path)!r}: {exc}") from exc
    if not isinstance(data, list):
        raise CorpusError(f"OSI export {str(path)!r} is not a JSON array")
    records = []
    skipped = 0
    for i, rec in enumerate(data):
        if not isinstance(rec, dict) or not isinstance(rec.get("id"), str) or not rec["id"]:
            log.warning("malformed OSI record #%d", i)
            skipped += 1
            continue
        text = _osi_text(rec, path.parent)
        if text is None:
            log.warning("OSI license %r has no text, skipped", rec["id"])
            skipped += 1
            continue
        records.append((rec["id"], str(rec.get("name") or rec["id"]), text))
    return _build(records, Source.OSI, k, w, skipped, jobs)


def load_plain(path: str | os.PathLike, k: int = DEFAULT_K, w: int = DEFAULT_W, jobs: int = 1) -> Corpus:
    """One license per ``*.txt`` file; the file stem is the license id."""
    root = _readable_dir(Path(path))
    records = []
    skipped = 0
    for f in sorted(root.glob("*.txt")):
        text = f.read_bytes().decode("utf-8", errors="replace")
        if not text.strip():
            log.warning("empty license file %s, skipped", f.name)
            skipped += 1
            continue
        records.append((f.stem, f.stem, text))
    return _build(records, Source.PLAIN, k, w, skipped, jobs)


def merge_corpora(a: Corpus, b: Corpus) -> Corpus:
    """Union of two corpora built with the same ``(k, w)``.

    Entries whose normalized token streams are identical collapse into the
    one with the best source (SPDX, then OSI, then plain; smallest id among
    equals); the others become its aliases. An id present in both with
    different texts keeps ``a``'s entry.
    """
    if a.params != b.params:
        raise CorpusError(f"cannot merge corpora with params {a.params} and {b.params}")

    by_id: dict[str, LicenseEntry] = {e.license_id: e for e in a.entries}
    skipped = a.skipped + b.skipped
    for e in b.entries:
        kept = by_id.get(e.license_id)
        if kept is None:
            by_id[e.license_id] = e
        elif kept.tokens == e.tokens:
            winner, loser = (e, kept) if e.source < kept.source else (kept, e)
            by_id[e.license_id] = _with_aliases(
                winner, winner.aliases + loser.aliases + (_qualified(loser),)
            )
        else:
            log.warning("license id %r differs between corpora, keeping first", e.license_id)
            skipped += 1

    groups: dict[tuple[str, ...], list[LicenseEntry]] = {}
    for e in by_id.values():
        groups.setdefault(e.tokens, []).append(e)

    entries = []
    for members in groups.values():
        members.sort(key=lambda e: (e.source, e.license_id))
        winner, rest = members[0], members[1:]
        aliases = list(winner.aliases)
        for other in rest:
            aliases.append(_qualified(other))
            aliases.extend(other.aliases)
        entries.append(_with_aliases(winner, tuple(aliases)))
    entries.sort(key=lambda e: e.license_id)
    return Corpus(tuple(entries), a.k, a.w, skipped)


def _qualified(e: LicenseEntry) -> str:
    return f"{e.source.name}:{e.license_id}"


def _with_aliases(e: LicenseEntry, aliases: Iterable[str]) -> LicenseEntry:
    clean = tuple(sorted(set(aliases) - {_qualified(e)}))
    return LicenseEntry(e.license_id, e.name, e.text, e.fingerprints, e.source, clean)


def source_digest(path: str | os.PathLike) -> str:
    """SHA-256 over the relative names and bytes of every file under ``path``."""
    path = Path(path)
    h = hashlib.sha256()
    files = [path] if path.is_file() else sorted(p for p in path.rglob("*") if p.is_file())
    for f in files:
        h.update(str(f.relative_to(path) if f != path else f.name).encode("utf-8"))
        h.update(b"\0")
        h.update(f.read_bytes())
        h.update(b"\0")
    return h.hexdigest()


def cache_key(k: int, w: int, sources: Mapping[str, str | os.PathLike]) -> dict:
    return {
        "k": k,
        "w": w,
        "sources": {kind: source_digest(p) for kind, p in sorted(sources.items())},
    }


def save_cache(corpus: Corpus, path: str | os.PathLike, key: Mapping | None = None) -> None:
    header = {
        "format": CACHE_FORMAT,
        "version": CACHE_VERSION,
        "k": corpus.k,
        "w": corpus.w,
        "skipped": corpus.skipped,
        "key": dict(key or {}),
    }
    lines = [json.dumps(header, sort_keys=True)]
    for e in corpus.entries:
        lines.append(
            json.dumps(
                {
                    "license_id": e.license_id,
                    "name": e.name,
                    "source": e.source.name,
                    "aliases": list(e.aliases),
                    "text": e.text,
                    "fingerprints": sorted(e.fingerprints.signatures),
                },
                sort_keys=True,
                ensure_ascii=False,
            )
        )
    tmp = Path(f"{os.fspath(path)}.tmp")
    tmp.write_text("\n".join(lines) + "\n", encoding="utf-8")
    os.replace(tmp, path)


def read_cache_header(path: str | os.PathLike) -> dict:
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
    try:
        header = json.loads(first)
    except ValueError as exc:
        raise CorpusError(f"{os.fspath(path)!r} is not a corpus cache") from exc
    if not isinstance(header, dict) or header.get("format") != CACHE_FORMAT:
        raise CorpusError(f"{os.fspath(path)!r} is not a corpus cache")
    if header.get("version") != CACHE_VERSION:
        raise CorpusError(f"unsupported corpus cache version {header.get('version')!r}")
    return header


def load_cache(path: str | os.PathLike) -> Corpus:
    try:
        header = read_cache_header(path)
        with open(path, encoding="utf-8") as fh:
            fh.readline()
            entries = []
            for line in fh:
                if not line.strip():
                    continue
                rec = json.loads(line)
                entries.append(
                    LicenseEntry(
                        rec["license_id"],
                        rec["name"],
                        rec["text"],
                        FingerprintSet(frozenset(rec["fingerprints"])),
                        Source[rec["source"]],
                        tuple(rec.get("aliases", ())),
                    )
                )
    except OSError as exc:
        raise CorpusError(f"cannot read corpus cache {os.fspath(path)!r}: {exc}") from exc
    except (ValueError, KeyError) as exc:
        raise CorpusError(f"corrupt corpus cache {os.fspath(path)!r}: {exc}") from exc
    return Corpus(tuple(entries), header["k"], header["w"], header.get("skipped", 0))
