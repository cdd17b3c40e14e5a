import gzip
import json
import os
import subprocess
from pathlib import Path

import pytest

from licmap.corpus import load_spdx

DATA = Path(__file__).parent / "data"
SNAPSHOT = DATA / "spdx-full.json.gz"


def spdx_snapshot() -> dict:
    with gzip.open(SNAPSHOT, "rt", encoding="utf-8") as fh:
        return json.load(fh)


def write_spdx_details(snapshot: dict, root: Path, ids=None) -> Path:
    details = root / "json" / "details"
    details.mkdir(parents=True, exist_ok=True)
    for lid, rec in snapshot.items():
        if ids is not None and lid not in ids:
            continue
        record = {"licenseId": lid, "name": rec["name"], "licenseText": rec["licenseText"]}
        (details / f"{lid}.json").write_text(json.dumps(record), encoding="utf-8")
    return root


@pytest.fixture(scope="session")
def snapshot():
    return spdx_snapshot()


@pytest.fixture(scope="session")
def spdx_dir(tmp_path_factory, snapshot):
    """License-list-data layout with every license in the snapshot.

    Set SPDX_LICENSE_DATA to a real license-list-data checkout to use it instead.
    """
    env = os.environ.get("SPDX_LICENSE_DATA")
    if env:
        return Path(env)
    return write_spdx_details(snapshot, tmp_path_factory.mktemp("license-list-data"))


@pytest.fixture(scope="session")
def spdx_corpus(spdx_dir):
    return load_spdx(spdx_dir)


SMALL_IDS = ("MIT", "Apache-2.0", "BSD-3-Clause", "BSD-2-Clause", "GPL-3.0-only", "ISC", "0BSD")


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory, snapshot):
    root = write_spdx_details(snapshot, tmp_path_factory.mktemp("small-spdx"), SMALL_IDS)
    return load_spdx(root)


class GitFixture:
    """Builds a repository commit by commit with pinned author/committer dates."""

    def __init__(self, path: Path, branch: str = "main"):
        self.path = path
        path.mkdir(parents=True, exist_ok=True)
        self.git("init", "-q", "-b", branch)
        self.git("config", "user.email", "dev@example.org")
        self.git("config", "user.name", "Dev")
        self.git("config", "commit.gpgsign", "false")

    def git(self, *args, date=None) -> str:
        env = dict(os.environ)
        if date is not None:
            env["GIT_AUTHOR_DATE"] = date
            env["GIT_COMMITTER_DATE"] = date
        return subprocess.run(
            ["git", "-C", str(self.path), *args], env=env, check=True, capture_output=True, text=True
        ).stdout

    def write(self, rel: str, content: str | bytes) -> None:
        f = self.path / rel
        f.parent.mkdir(parents=True, exist_ok=True)
        if isinstance(content, str):
            content = content.encode("utf-8")
        f.write_bytes(content)

    def commit(self, message: str, date: str, files: dict | None = None, remove=()) -> str:
        for rel, content in (files or {}).items():
            self.write(rel, content)
            self.git("add", "--", rel)
        for rel in remove:
            self.git("rm", "-q", "--", rel)
        self.git("commit", "-q", "--allow-empty", "-m", message, date=date)
        return self.git("rev-parse", "HEAD").strip()

    def blob_id(self, content: str | bytes) -> str:
        if isinstance(content, str):
            content = content.encode("utf-8")
        return subprocess.run(
            ["git", "hash-object", "--stdin"], input=content, check=True, capture_output=True
        ).stdout.decode().strip()


@pytest.fixture
def make_repo(tmp_path):
    def make(name: str, branch: str = "main") -> GitFixture:
        return GitFixture(tmp_path / name, branch)

    return make


# One pass/fail line per acceptance criterion, printed after the run.
_acceptance: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and (report.when == "call" or report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        if report.when == "call" or name not in _acceptance:
            _acceptance[name] = report.outcome.upper()


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance):
        terminalreporter.write_line(f"{_acceptance[name]:<8} {name}")
