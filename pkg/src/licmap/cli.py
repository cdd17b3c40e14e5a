"""Command-line front end.

Subcommands: corpus-build, match, scan, merge, metrics. Exit status is 0
on success, 1 on a partial or pipeline failure, and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from licmap import corpus as corpus_mod
from licmap import metrics as metrics_mod
from licmap import p2l
from licmap.fingerprint import DEFAULT_K, DEFAULT_W
from licmap.gitscan import GitError, ScanConfig, blob_index, index_repo
from licmap.matcher import DEFAULT_THRESHOLD, Matched, NoMatch, bucket_report
from licmap.pipeline import match_texts, scan_repos

log = logging.getLogger("licmap")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


@dataclass
class RunConfig:
    corpus_paths: dict[str, str] = field(default_factory=dict)
    k: int = DEFAULT_K
    w: int = DEFAULT_W
    threshold: float = DEFAULT_THRESHOLD
    path_filter: str = "license"
    output: str | None = None
    include_method: bool = False
    jobs: int = 1
    scan_time: int | None = None

    def __post_init__(self) -> None:
        if not 0 < self.threshold <= 1:
            raise ValueError("threshold must be in (0, 1]")
        if self.k < 1 or self.w < 1:
            raise ValueError("k and w must be >= 1")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        if not self.path_filter:
            raise ValueError("path filter must be non-empty")

    def header(self, command: str) -> str:
        return (
            f"# licmap {command} k={self.k} w={self.w} threshold={self.threshold} "
            f"filter={self.path_filter}"
        )


def parse_scan_time(value: str) -> int:
    """Epoch seconds, or an ISO-8601 date/datetime (UTC if no offset given)."""
    try:
        return int(value)
    except ValueError:
        pass
    try:
        dt = datetime.fromisoformat(value.replace("Z", "+00:00"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad scan time {value!r}") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def _positive_int(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def _threshold(value: str) -> float:
    t = float(value)
    if not 0 < t <= 1:
        raise argparse.ArgumentTypeError("must be in (0, 1]")
    return t


def _write(path: str | None, data: bytes) -> None:
    if path is None or path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        Path(path).write_bytes(data)


def _load_corpus(path: str) -> corpus_mod.Corpus:
    c = corpus_mod.load_cache(path)
    if len(c) == 0:
        raise corpus_mod.CorpusError(f"corpus {path!r} is empty")
    return c


def cmd_corpus_build(args: argparse.Namespace) -> int:
    sources = {kind: getattr(args, kind) for kind in ("spdx", "osi", "plain") if getattr(args, kind)}
    if not sources:
        args.parser.error("give at least one of --spdx, --osi, --plain")
    cfg = RunConfig(corpus_paths=sources, k=args.k, w=args.w, jobs=args.jobs, output=args.out)
    print(cfg.header("corpus-build"), file=sys.stderr)

    key = corpus_mod.cache_key(cfg.k, cfg.w, sources)
    if os.path.exists(args.out) and not args.force:
        try:
            if corpus_mod.read_cache_header(args.out).get("key") == key:
                c = corpus_mod.load_cache(args.out)
                print(f"cache up to date: {len(c)} entries in {args.out}")
                return EXIT_OK
        except corpus_mod.CorpusError:
            pass

    loaders = {"spdx": corpus_mod.load_spdx, "osi": corpus_mod.load_osi, "plain": corpus_mod.load_plain}
    built = None
    total = 0
    for kind in ("spdx", "osi", "plain"):
        if kind not in sources:
            continue
        part = loaders[kind](sources[kind], cfg.k, cfg.w, cfg.jobs)
        total += len(part)
        print(f"{kind}: {len(part)} entries, {part.skipped} skipped")
        built = part if built is None else corpus_mod.merge_corpora(built, part)
    assert built is not None
    corpus_mod.save_cache(built, args.out, key)
    n_alias = sum(len(e.aliases) for e in built.entries)
    print(f"corpus: {len(built)} entries from {total} loaded, {n_alias} aliases, written to {args.out}")
    return EXIT_OK


def _match_inputs(path: Path) -> list[Path]:
    if path.is_dir():
        return sorted(p for p in path.rglob("*") if p.is_file())
    return [path]


def cmd_match(args: argparse.Namespace) -> int:
    c = _load_corpus(args.corpus)
    cfg = RunConfig(k=c.k, w=c.w, threshold=args.threshold, jobs=args.jobs)
    files = [p for src in args.inputs for p in _match_inputs(Path(src))]
    texts, readable, errors = [], [], 0
    lines = [cfg.header("match")]
    for f in files:
        try:
            texts.append(f.read_bytes())
            readable.append(f)
        except OSError as exc:
            errors += 1
            lines.append(f"{f}\terror: {exc.strerror or exc}")
    outcomes = match_texts(texts, c, cfg.threshold, cfg.jobs)
    for f, o in zip(readable, outcomes):
        if isinstance(o, NoMatch):
            status = "no-signatures" if o.blob_signature_count == 0 else f"- 0.0000 NoMatch signatures={o.blob_signature_count}"
        else:
            r = o.result
            label = "Matched" if isinstance(o, Matched) else "BelowThreshold"
            status = (
                f"{r.license_id} {r.score:.4f} {label} shared={r.shared} "
                f"union={r.union_count} signatures={r.blob_signature_count}"
            )
        lines.append(f"{f}\t{status}")
    report = bucket_report(outcomes)
    lines.append("")
    body = "\n".join(lines) + "\n"
    body += report.to_kv() if args.format == "kv" else report.to_text()
    sys.stdout.write(body)
    return EXIT_FAILURE if files and errors == len(files) else EXIT_OK


def cmd_scan(args: argparse.Namespace) -> int:
    c = _load_corpus(args.corpus)
    cfg = RunConfig(
        k=c.k,
        w=c.w,
        threshold=args.threshold,
        path_filter=args.filter,
        output=args.out,
        include_method=args.include_method,
        jobs=args.jobs,
        scan_time=args.scan_time if args.scan_time is not None else int(datetime.now(timezone.utc).timestamp()),
    )
    print(cfg.header("scan"), file=sys.stderr)
    if args.project_id and len(args.project_id) != len(args.repos):
        args.parser.error("--project-id must be given once per repository")
    scan_cfg = ScanConfig(path_filter=cfg.path_filter, use_committer_time=args.committer_time)
    result = scan_repos(
        args.repos, c, scan_cfg, cfg.scan_time, cfg.threshold, cfg.jobs, args.project_id or None
    )
    _write(cfg.output, p2l.emit(result.records, cfg.include_method))

    report = result.report
    print(
        f"repos={len(args.repos)} failed={len(result.failures)} candidates={len(result.outcomes)} "
        f"accepted={report.accepted} rows={len(result.records)}",
        file=sys.stderr,
    )
    if args.report:
        Path(args.report).write_text(report.to_kv() if args.report.endswith(".kv") else report.to_text())
    return EXIT_FAILURE if result.failures else EXIT_OK


def _read_p2l(path: str) -> tuple[list[p2l.P2LRecord], bool]:
    data = Path(path).read_bytes()
    try:
        records = p2l.parse(data)
    except p2l.P2LError as exc:
        raise p2l.P2LError(f"{path}: {exc}") from None
    first = next((ln for ln in data.split(b"\n") if ln), b"")
    return records, first.count(b";") == 3


def cmd_merge(args: argparse.Namespace) -> int:
    if args.external and not args.repo:
        args.parser.error("--external needs at least one --repo to map blobs to projects")
    merged: list[p2l.P2LRecord] = []
    with_method = False
    for path in args.inputs:
        records, four = _read_p2l(path)
        with_method = with_method or four
        merged = p2l.merge_records(merged, records)

    status = EXIT_OK
    if args.external:
        with_method = True
        stats = p2l.IngestStats()
        text = Path(args.external).read_text(encoding="utf-8")
        try:
            detections = p2l.parse_external(text, stats)
        except p2l.P2LError as exc:
            raise p2l.P2LError(f"{args.external}: {exc}") from None
        records = []
        for i, repo in enumerate(args.repo):
            pid = args.project_id[i] if args.project_id else None
            try:
                records.extend(index_repo(repo, args.scan_time, pid))
            except GitError as exc:
                log.error("%s", exc)
                status = EXIT_FAILURE
        external = p2l.ingest_external(detections, blob_index(records), args.min_confidence, stats)
        merged = p2l.merge_records(merged, external)
        for line in stats.malformed_lines:
            print(f"{args.external}:{line}: malformed detection skipped", file=sys.stderr)
        print(
            f"external: read={stats.read} kept={stats.kept} below_confidence={stats.below_confidence} "
            f"absent={stats.absent} malformed={stats.malformed} rows={len(external)}",
            file=sys.stderr,
        )
    _write(args.out, p2l.emit(merged, include_method=with_method or args.include_method))
    return status


def cmd_metrics(args: argparse.Namespace) -> int:
    if args.counts:
        counts = metrics_mod.ConfusionCounts(*args.counts)
    else:
        if not args.p2l or not args.truth:
            args.parser.error("give a P2L file and a truth CSV, or --counts TP FP FN TN")
        records, _ = _read_p2l(args.p2l)
        try:
            truth = metrics_mod.parse_truth(Path(args.truth).read_text(encoding="utf-8"))
        except ValueError as exc:
            raise ValueError(f"{args.truth}: {exc}") from None
        counts = metrics_mod.compare_against_truth(records, truth)
    m = metrics_mod.compute_metrics(counts)
    sys.stdout.write(metrics_mod.format_report(counts, m, kv=args.format == "kv"))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="licmap", description="Identify licenses in git repositories and build project-to-license maps."
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log info messages")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help, description=help)
        p.set_defaults(func=func, parser=p)
        return p

    p = add("corpus-build", cmd_corpus_build, "fingerprint license sources into a corpus cache")
    p.add_argument("--spdx", help="SPDX license-list-data checkout or its json/details directory")
    p.add_argument("--osi", help="OSI license JSON export")
    p.add_argument("--plain", help="directory of <license-id>.txt files")
    p.add_argument("-k", type=_positive_int, default=DEFAULT_K, help="k-gram size in words (default %(default)s)")
    p.add_argument("-w", type=_positive_int, default=DEFAULT_W, help="winnowing window (default %(default)s)")
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--force", action="store_true", help="rebuild even if the cache key matches")
    p.add_argument("--out", required=True, help="corpus cache file to write")

    p = add("match", cmd_match, "match files against a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("inputs", nargs="+", help="files or directories")
    p.add_argument("--threshold", type=_threshold, default=DEFAULT_THRESHOLD)
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--format", choices=("text", "kv"), default="text", help="summary report format")

    p = add("scan", cmd_scan, "scan git repositories into a P2L file")
    p.add_argument("--corpus", required=True)
    p.add_argument("repos", nargs="+", help="local git repositories")
    p.add_argument("--out", help="P2L file (default stdout)")
    p.add_argument("--project-id", action="append", help="project id per repository, in order")
    p.add_argument("--threshold", type=_threshold, default=DEFAULT_THRESHOLD)
    p.add_argument("--filter", default="license", help="case-insensitive path substring (default %(default)s)")
    p.add_argument("--scan-time", type=parse_scan_time, help="epoch seconds or ISO date (default now)")
    p.add_argument("--committer-time", action="store_true", help="use committer instead of author time")
    p.add_argument("--include-method", action="store_true", help="append the method column")
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--report", help="write the bucket report here (key=value if it ends in .kv)")

    p = add("merge", cmd_merge, "merge P2L files and external detections")
    p.add_argument("inputs", nargs="*", help="P2L files")
    p.add_argument("--external", help="CSV/TSV of blob_hash,license_id,confidence")
    p.add_argument("--repo", action="append", default=[], help="repository used to place external blobs")
    p.add_argument("--project-id", action="append", help="project id per --repo, in order")
    p.add_argument("--min-confidence", type=float, default=p2l.DEFAULT_MIN_CONFIDENCE)
    p.add_argument("--scan-time", type=parse_scan_time)
    p.add_argument("--include-method", action="store_true", help="always write the method column")
    p.add_argument("--out", help="merged P2L file (default stdout)")

    p = add("metrics", cmd_metrics, "confusion-matrix metrics of a P2L file against ground truth")
    p.add_argument("p2l", nargs="?")
    p.add_argument("truth", nargs="?", help="CSV with project_id,has_license")
    p.add_argument("--counts", type=int, nargs=4, metavar=("TP", "FP", "FN", "TN"))
    p.add_argument("--format", choices=("text", "kv"), default="text")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (corpus_mod.CorpusError, p2l.P2LError, GitError, ValueError, OSError) as exc:
        print(f"licmap {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
