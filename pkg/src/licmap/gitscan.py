"""Finding license-path blobs across the full history of git repositories.

All git access goes through the ``git`` command line. For every commit
reachable from any ref, the blobs it introduces (relative to its first
parent, or everything for a root commit) are collected with their paths
and commit time. Blobs ever seen under a path containing the filter
string become license candidates; all of their introductions, under any
path, contribute commit months.
"""

from __future__ import annotations

import logging
import os
import subprocess
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator

log = logging.getLogger(__name__)

INVALID = "invalid"
# 1971-01-01T00:00:00Z; earlier author times are treated as junk.
MIN_VALID_TIME = 31536000
# Regular and executable files; symlinks and submodules are not scanned.
FILE_MODES = frozenset({"100644", "100755", "100664"})
NULL_SHA = "0" * 40


class GitError(Exception):
    """A repository could not be read."""


@dataclass(frozen=True)
class ScanConfig:
    path_filter: str = "license"
    include_all_paths_for_known_blobs: bool = True
    use_committer_time: bool = False

    def __post_init__(self) -> None:
        if not self.path_filter:
            raise ValueError("path_filter must be non-empty")

    def matches(self, path: str) -> bool:
        return self.path_filter.casefold() in path.casefold()


@dataclass(frozen=True)
class BlobRecord:
    blob_hash: str
    project_id: str
    paths: frozenset[str]
    commit_months: frozenset[str]
    in_latest: bool


def month_of(timestamp: int, scan_time: int) -> str:
    """UTC ``YYYY-MM`` of ``timestamp``, or ``"invalid"`` outside [1971-01, scan_time]."""
    if timestamp < MIN_VALID_TIME or timestamp > scan_time:
        return INVALID
    return datetime.fromtimestamp(timestamp, tz=timezone.utc).strftime("%Y-%m")


def default_project_id(repo: str | os.PathLike) -> str:
    name = Path(os.path.abspath(repo)).name
    if name == ".git":
        name = Path(os.path.abspath(repo)).parent.name
    elif name.endswith(".git"):
        name = name[: -len(".git")]
    return name


def _git(repo: str | os.PathLike, *args: str, input: bytes | None = None) -> bytes:
    cmd = ["git", "-C", os.fspath(repo), *args]
    try:
        proc = subprocess.run(cmd, input=input, capture_output=True, check=False)
    except OSError as exc:
        raise GitError(f"{os.fspath(repo)}: cannot run git: {exc}") from exc
    if proc.returncode != 0:
        msg = proc.stderr.decode("utf-8", errors="replace").strip()
        raise GitError(f"{os.fspath(repo)}: git {args[0]} failed: {msg}")
    return proc.stdout


def check_repo(repo: str | os.PathLike) -> None:
    """Fail unless ``repo`` is the top of a worktree or a bare repository."""
    if not Path(repo).is_dir():
        raise GitError(f"{os.fspath(repo)}: not a directory")
    out = _git(repo, "rev-parse", "--is-bare-repository", "--absolute-git-dir").decode().split("\n")
    bare, git_dir = out[0].strip() == "true", out[1].strip()
    here = os.path.realpath(repo)
    if bare:
        top = os.path.realpath(git_dir)
    else:
        top = os.path.realpath(_git(repo, "rev-parse", "--show-toplevel").decode().strip())
    if top != here:
        raise GitError(f"{os.fspath(repo)}: not the root of a git repository (root is {top})")


@dataclass(frozen=True)
class Introduction:
    commit: str
    author_time: int
    committer_time: int
    blob_hash: str
    path: str


def iter_introductions(repo: str | os.PathLike) -> Iterator[Introduction]:
    """Every (commit, blob, path) where a commit adds or changes a file.

    Merge commits are diffed against their first parent only.
    """
    out = _git(
        repo,
        "log",
        "--all",
        "--root",
        "--no-renames",
        "--diff-merges=first-parent",
        "--raw",
        "--no-abbrev",
        "-z",
        "--format=%x01%H %at %ct",
    )
    commit = None
    at = ct = 0
    meta: list[str] | None = None
    for token in out.split(b"\0"):
        if meta is not None:
            # token is the path belonging to the preceding meta entry
            _old_mode, new_mode, _old_sha, new_sha, status = meta
            meta = None
            if commit and new_sha != NULL_SHA and new_mode in FILE_MODES and status[:1] in "AMT":
                yield Introduction(commit, at, ct, new_sha, os.fsdecode(token))
            continue
        token = token.lstrip(b"\n")
        if not token:
            continue
        if token.startswith(b"\x01"):
            fields = token[1:].decode("ascii").split()
            commit, at, ct = fields[0], int(fields[1] or 0), int(fields[2] or 0)
        elif token.startswith(b":"):
            meta = token[1:].decode("ascii").split()
            if len(meta) != 5:
                log.warning("%s: unexpected raw diff line %r", os.fspath(repo), token)
                meta = None
        else:
            log.warning("%s: unexpected log output %r", os.fspath(repo), token[:80])


def head_blobs(repo: str | os.PathLike) -> frozenset[str]:
    """Blob ids anywhere in the tree of HEAD (the default branch); empty if unborn."""
    try:
        _git(repo, "rev-parse", "--verify", "--quiet", "HEAD^{commit}")
    except GitError:
        return frozenset()
    out = _git(repo, "ls-tree", "-r", "-z", "--full-tree", "HEAD")
    blobs = set()
    for entry in out.split(b"\0"):
        if not entry:
            continue
        meta, _, _path = entry.partition(b"\t")
        parts = meta.split()
        if len(parts) == 3 and parts[1] == b"blob":
            blobs.add(parts[2].decode("ascii"))
    return frozenset(blobs)


def _assemble(
    repo: str | os.PathLike,
    project_id: str,
    scan_time: int,
    cfg: ScanConfig,
    filtered: bool,
) -> list[BlobRecord]:
    paths: dict[str, set[str]] = {}
    months: dict[str, set[str]] = {}
    candidates: set[str] = set()
    by_blob: dict[str, list[Introduction]] = {}
    for intro in iter_introductions(repo):
        by_blob.setdefault(intro.blob_hash, []).append(intro)
        if not filtered or cfg.matches(intro.path):
            candidates.add(intro.blob_hash)

    for blob in candidates:
        for intro in by_blob[blob]:
            if filtered and not cfg.include_all_paths_for_known_blobs and not cfg.matches(intro.path):
                continue
            t = intro.committer_time if cfg.use_committer_time else intro.author_time
            paths.setdefault(blob, set()).add(intro.path)
            months.setdefault(blob, set()).add(month_of(t, scan_time))

    latest = head_blobs(repo)
    return [
        BlobRecord(
            blob_hash=blob,
            project_id=project_id,
            paths=frozenset(paths[blob]),
            commit_months=frozenset(months[blob]),
            in_latest=blob in latest,
        )
        for blob in sorted(paths)
    ]


def scan_repo(
    repo: str | os.PathLike,
    cfg: ScanConfig = ScanConfig(),
    scan_time: int | None = None,
    project_id: str | None = None,
) -> list[BlobRecord]:
    """License-candidate blobs of one repository, one record per blob, sorted by hash."""
    check_repo(repo)
    if scan_time is None:
        scan_time = int(datetime.now(timezone.utc).timestamp())
    return _assemble(repo, project_id or default_project_id(repo), scan_time, cfg, filtered=True)


def index_repo(
    repo: str | os.PathLike,
    scan_time: int | None = None,
    project_id: str | None = None,
    cfg: ScanConfig = ScanConfig(),
) -> list[BlobRecord]:
    """Like :func:`scan_repo` but for every blob, regardless of path."""
    check_repo(repo)
    if scan_time is None:
        scan_time = int(datetime.now(timezone.utc).timestamp())
    return _assemble(repo, project_id or default_project_id(repo), scan_time, cfg, filtered=False)


def blob_index(records: Iterable[BlobRecord]) -> dict[str, list[BlobRecord]]:
    """Blob hash -> its records across projects."""
    index: dict[str, list[BlobRecord]] = {}
    for r in records:
        index.setdefault(r.blob_hash, []).append(r)
    return index


def read_blobs(repo: str | os.PathLike, hashes: Iterable[str]) -> dict[str, bytes]:
    """Contents of the given blobs; missing or unreadable objects are skipped with a warning."""
    wanted = sorted(set(hashes))
    if not wanted:
        return {}
    out = _git(repo, "cat-file", "--batch", input="".join(f"{h}\n" for h in wanted).encode("ascii"))
    contents: dict[str, bytes] = {}
    pos = 0
    for h in wanted:
        nl = out.index(b"\n", pos)
        header = out[pos:nl].split()
        pos = nl + 1
        if len(header) != 3:
            log.warning("%s: cannot read object %s", os.fspath(repo), h)
            continue
        size = int(header[2])
        data = out[pos : pos + size]
        pos += size + 1
        if header[1] != b"blob":
            log.warning("%s: object %s is a %s, not a blob", os.fspath(repo), h, header[1].decode())
            continue
        contents[h] = data
    return contents
