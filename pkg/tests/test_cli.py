import random
import re

import pytest

from licmap.cli import main, parse_scan_time
from licmap.fingerprint import DEFAULT_K, DEFAULT_W

from conftest import SMALL_IDS, write_spdx_details
from oracles import naive_score, naive_tokens, naive_winnow

SCAN = "2024-06-01"


@pytest.fixture(scope="module")
def corpus_file(tmp_path_factory, snapshot):
    root = write_spdx_details(snapshot, tmp_path_factory.mktemp("spdx"), SMALL_IDS)
    out = tmp_path_factory.mktemp("cache") / "corpus.jsonl"
    assert main(["corpus-build", "--spdx", str(root), "--out", str(out)]) == 0
    return out


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_scan_time():
    assert parse_scan_time("86400") == 86400
    assert parse_scan_time("1970-01-02") == 86400
    assert parse_scan_time("1970-01-02T01:00:00+01:00") == 86400


def test_corpus_build_plain_and_cache_hit(tmp_path, capsys, snapshot):
    plain = tmp_path / "plain"
    plain.mkdir()
    (plain / "MIT.txt").write_text(snapshot["MIT"]["licenseText"])
    (plain / "ISC.txt").write_text(snapshot["ISC"]["licenseText"])
    out = tmp_path / "c.jsonl"
    code, stdout, err = run(capsys, "corpus-build", "--plain", plain, "--out", out)
    assert code == 0
    assert "corpus: 2 entries" in stdout
    assert f"k={DEFAULT_K} w={DEFAULT_W} threshold=0.85" in err
    code, stdout, _ = run(capsys, "corpus-build", "--plain", plain, "--out", out)
    assert code == 0 and "cache up to date: 2 entries" in stdout


def test_corpus_build_without_source_is_usage_error(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["corpus-build", "--out", str(tmp_path / "c.jsonl")])
    assert exc.value.code == 2


def test_bad_threshold_is_usage_error(corpus_file, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["match", "--corpus", str(corpus_file), "--threshold", "1.5", str(tmp_path)])
    assert exc.value.code == 2


def test_match_self_and_empty(corpus_file, tmp_path, capsys, snapshot):
    (tmp_path / "LICENSE").write_text(snapshot["MIT"]["licenseText"])
    (tmp_path / "empty").write_text("")
    (tmp_path / "other").write_text("nothing here resembles any license text at all really")
    code, out, _ = run(capsys, "match", "--corpus", corpus_file, tmp_path, "--format", "kv")
    assert code == 0
    assert re.search(r"LICENSE\tMIT 1\.0000 Matched", out)
    assert re.search(r"empty\tno-signatures", out)
    assert re.search(r"other\t- 0\.0000 NoMatch", out)
    assert "no_signatures=1" in out and "accepted=1" in out


def test_match_score_equals_oracle(corpus_file, tmp_path, capsys, snapshot):
    text = snapshot["GPL-3.0-only"]["licenseText"]
    words = text.split()
    rng = random.Random(3)
    drop = set(rng.sample(range(len(words)), len(words) // 10))
    edited = " ".join(w for i, w in enumerate(words) if i not in drop)
    (tmp_path / "COPYING").write_text(edited)
    code, out, _ = run(capsys, "match", "--corpus", corpus_file, tmp_path / "COPYING")
    assert code == 0
    m = re.search(r"COPYING\tGPL-3\.0-only (\d\.\d{4}) ", out)
    assert m
    expected = naive_score(
        naive_winnow(naive_tokens(edited), DEFAULT_K, DEFAULT_W),
        naive_winnow(naive_tokens(text), DEFAULT_K, DEFAULT_W),
    )
    assert m.group(1) == f"{expected:.4f}"


def test_match_unreadable_only_fails(corpus_file, tmp_path, capsys):
    code, out, _ = run(capsys, "match", "--corpus", corpus_file, tmp_path / "nope")
    assert code == 1


def test_scan_fixture_and_empty_repo(corpus_file, make_repo, capsys, snapshot, tmp_path):
    r = make_repo("proj")
    r.commit("add", "2020-05-15T10:00:00Z", {"LICENSE": snapshot["MIT"]["licenseText"]})
    bare = make_repo("bare")
    bare.commit("x", "2020-01-01T00:00:00Z", {"main.c": "int main;"})
    code, out, _ = run(capsys, "scan", "--corpus", corpus_file, "--scan-time", SCAN, r.path, bare.path)
    assert code == 0
    assert out == "proj;MIT;2020-05\nproj;MIT;latest\n"
    code, out, _ = run(capsys, "scan", "--corpus", corpus_file, "--scan-time", SCAN, bare.path)
    assert (code, out) == (0, "")
    report = tmp_path / "r.kv"
    code, out, _ = run(
        capsys, "scan", "--corpus", corpus_file, "--scan-time", SCAN, "--include-method",
        "--project-id", "P1", "--report", report, r.path,
    )
    assert out == "P1;MIT;2020-05;1-WoC\nP1;MIT;latest;1-WoC\n"
    assert "accepted=1" in report.read_text()


def test_scan_jobs_do_not_change_output(corpus_file, make_repo, capsys, snapshot):
    repos = []
    for i, lid in enumerate(("Apache-2.0", "BSD-2-Clause", "ISC", "0BSD")):
        r = make_repo(f"r{i}")
        r.commit("a", f"202{i}-0{i + 1}-01T00:00:00Z", {"LICENSE": snapshot[lid]["licenseText"]})
        r.commit("b", "2023-01-01T00:00:00Z", {"docs/license.txt": snapshot["MIT"]["licenseText"]})
        repos.append(r.path)
    base = ["scan", "--corpus", corpus_file, "--scan-time", SCAN]
    _, one, _ = run(capsys, *base, "--jobs", 1, *repos)
    _, two, _ = run(capsys, *base, "--jobs", 2, *reversed(repos))
    assert one == two
    assert one.splitlines() == sorted(one.splitlines())
    assert "r2;ISC;2022-03" in one


def test_scan_failed_repo_exit_code(corpus_file, tmp_path, make_repo, capsys, snapshot):
    r = make_repo("ok")
    r.commit("a", "2020-01-01T00:00:00Z", {"LICENSE": snapshot["MIT"]["licenseText"]})
    code, out, err = run(capsys, "scan", "--corpus", corpus_file, "--scan-time", SCAN, r.path, tmp_path / "none")
    assert code == 1
    assert "ok;MIT;2020-01" in out
    assert "failed=1" in err


def test_merge_identical_and_external(corpus_file, make_repo, tmp_path, capsys, snapshot):
    a = tmp_path / "a.p2l"
    a.write_bytes(b"P;MIT;2020-05\nP;MIT;latest\n")
    b = tmp_path / "b.p2l"
    b.write_bytes(a.read_bytes())
    code, out, _ = run(capsys, "merge", a, b)
    assert (code, out) == (0, a.read_text())

    r = make_repo("P")
    r.commit("a", "2018-03-01T00:00:00Z", {"vendor/x.c": "int x;"})
    ext = tmp_path / "ext.csv"
    ext.write_text(f"blob_hash,license_id,confidence\n{r.blob_id('int x;')},GPL-2.0-only,0.97\n")
    code, out, err = run(capsys, "merge", a, "--external", ext, "--repo", r.path, "--scan-time", SCAN)
    assert code == 0
    assert out == "P;GPL-2.0-only;2018-03;2-SH\nP;GPL-2.0-only;latest;2-SH\nP;MIT;2020-05;1-WoC\nP;MIT;latest;1-WoC\n"
    assert "kept=1" in err


def test_merge_external_needs_repo(tmp_path):
    ext = tmp_path / "ext.csv"
    ext.write_text("blob_hash,license_id,confidence\n")
    with pytest.raises(SystemExit) as exc:
        main(["merge", "--external", str(ext)])
    assert exc.value.code == 2


def test_metrics_from_truth(tmp_path, capsys):
    # 210 licensed projects detected, 81 false alarms, 22 misses, 267 clean.
    rows, truth = [], ["project_id,has_license"]
    for i in range(210):
        rows.append(f"tp{i:03d};MIT;latest")
        truth.append(f"tp{i:03d},1")
    for i in range(81):
        rows.append(f"fp{i:03d};MIT;latest")
        truth.append(f"fp{i:03d},0")
    truth += [f"fn{i:03d},1" for i in range(22)] + [f"tn{i:03d},0" for i in range(267)]
    p = tmp_path / "pred.p2l"
    p.write_text("\n".join(sorted(rows)) + "\n")
    t = tmp_path / "truth.csv"
    t.write_text("\n".join(truth) + "\n")
    code, out, _ = run(capsys, "metrics", p, t, "--format", "kv")
    assert code == 0
    kv = dict(line.split("=") for line in out.splitlines())
    assert (kv["accuracy"], kv["precision"], kv["recall"], kv["f1"]) == ("82.24", "72.16", "90.52", "80.31")
    code, out, _ = run(capsys, "metrics", "--counts", 210, 31, 10, 267)
    assert "F1 Score     91.11%" in out


def test_metrics_parse_failure_names_file_and_line(tmp_path, capsys):
    p = tmp_path / "bad.p2l"
    p.write_text("P;MIT;latest\nP;MIT\n")
    t = tmp_path / "t.csv"
    t.write_text("project_id,has_license\nP,1\n")
    code, _, err = run(capsys, "metrics", p, t)
    assert code == 1
    assert "bad.p2l" in err and "line 2" in err
