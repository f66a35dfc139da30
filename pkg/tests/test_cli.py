import csv
import json
import shutil

import pytest

from famlab import cli
from famlab.suites import instance_path


@pytest.fixture
def work(tmp_path):
    for name in ("depth4_sampled.json", "tiny_exhaustive.json", "sandwich_four_atoms.json", "density_depth3.json",
                 "audit_tiny.json", "depth4_pieces.json"):
        shutil.copy(instance_path(name), tmp_path / name)
    return tmp_path


def run(*argv):
    return cli.main([str(a) for a in argv])


def write(path, data):
    path.write_text(json.dumps(data))
    return path


@pytest.mark.parametrize(
    "name",
    ["depth4_sampled", "tiny_exhaustive", "sandwich_four_atoms", "density_depth3", "audit_tiny", "depth4_pieces"],
)
def test_shipped_instances_pass(work, name):
    out = work / "out"
    assert run("run", work / f"{name}.json", "--out-dir", out) == cli.EXIT_OK
    report = json.loads((out / f"{name}.report.json").read_text())
    assert report["status"] == "pass" and report["input"] == name
    with open(out / f"{name}.summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert rows and {r["holds"] for r in rows} == {"True"}
    assert list(rows[0]) == ["check", "lhs", "relation", "rhs", "holds"]


def test_missing_file(work):
    assert run("run", work / "nope.json", "--out-dir", work / "out") == cli.EXIT_MISSING
    assert run("verify", work / "nope.json", "--out-dir", work / "out") == cli.EXIT_MISSING


def test_parse_errors(work):
    bad = work / "bad.json"
    bad.write_text("{ not json")
    assert run("run", bad) == cli.EXIT_PARSE
    assert run("run", write(work / "kind.json", {"kind": "nonsense"})) == cli.EXIT_PARSE
    assert run("run", write(work / "list.json", [1, 2])) == cli.EXIT_PARSE
    spec = json.loads((work / "sandwich_four_atoms.json").read_text())
    spec["Q"] = ["no_such_element"]
    del spec["threshold"]
    assert run("run", write(work / "name.json", spec), "--out-dir", work / "out") == cli.EXIT_PARSE
    assert run("suite", "no-such-suite") == cli.EXIT_PARSE


def test_sampled_run_needs_a_seed(work, monkeypatch):
    monkeypatch.delenv("FAMLAB_SEED", raising=False)
    spec = json.loads((work / "depth4_sampled.json").read_text())
    del spec["seed"]
    path = write(work / "noseed.json", spec)
    assert run("run", path, "--out-dir", work / "out") == cli.EXIT_PARSE
    monkeypatch.setenv("FAMLAB_SEED", "0")
    assert run("run", path, "--out-dir", work / "out") == cli.EXIT_OK
    cert = json.loads((work / "out" / "noseed.certificate.json").read_text())
    assert cert["search"]["seed"] == 0


def test_seed_precedence(monkeypatch):
    monkeypatch.setenv("FAMLAB_SEED", "7")
    assert cli.resolve_seed(3, 5) == 3
    assert cli.resolve_seed(None, 5) == 5
    assert cli.resolve_seed(None, None) == 7
    monkeypatch.delenv("FAMLAB_SEED")
    assert cli.resolve_seed(None, None) is None


def test_precondition_failure_exits_one(work):
    spec = json.loads((work / "depth4_sampled.json").read_text())
    spec["deltas"] = ["3/4", "3/4"]
    assert run("run", write(work / "hard.json", spec), "--out-dir", work / "out") == cli.EXIT_FAILED


def test_budget_exhausted(work):
    out = work / "out"
    assert run("run", work / "depth4_sampled.json", "--budget", 1, "--out-dir", out) == cli.EXIT_BUDGET
    report = json.loads((out / "depth4_sampled.report.json").read_text())
    assert report["status"] == "budget exhausted"
    assert report["stats"]["paths"] == 1
    assert run("run", work / "sandwich_four_atoms.json", "--budget", 1, "--out-dir", out) == cli.EXIT_BUDGET
    report = json.loads((out / "sandwich_four_atoms.report.json").read_text())
    assert report["budget_exhausted"] is True


def test_sandwich_on_top():
    spec = {"kind": "intnum-sandwich", "algebra": {"atoms": 3, "weights": ["1/2", "1/3", "1/6"]}, "Q": ["top"]}
    args = cli.build_parser().parse_args(["run", "x.json"])
    body, rows, _ = cli.run_intnum_sandwich(spec, args, None)
    assert body["sandwich"]["lower"] == "1/1" and body["sandwich"]["upper"] == "1/1"
    assert all(r["holds"] for r in rows)


def test_verify_and_tamper(work):
    out = work / "out"
    assert run("run", work / "depth4_sampled.json", "--out-dir", out) == cli.EXIT_OK
    cert_path = out / "depth4_sampled.certificate.json"
    assert run("verify", cert_path, "--out-dir", work / "v") == cli.EXIT_OK
    cert = json.loads(cert_path.read_text())
    cert["u"] = cert["u"][:-1]
    bad = write(work / "tampered.json", cert)
    assert run("verify", bad, "--out-dir", work / "v") == cli.EXIT_FAILED
    report = json.loads((work / "v" / "tampered.report.json").read_text())
    assert report["status"] == "fail"
    # the same check through an experiment file
    spec = {"kind": "verify-certificate", "certificate": str(cert_path)}
    assert run("run", write(work / "check.json", spec), "--out-dir", work / "v") == cli.EXIT_OK


def test_reruns_are_byte_identical(work):
    a, b, c = work / "a", work / "b", work / "c"
    assert run("run", work / "depth4_sampled.json", "--out-dir", a) == cli.EXIT_OK
    assert run("run", work / "depth4_sampled.json", "--out-dir", b) == cli.EXIT_OK
    assert run("run", work / "depth4_sampled.json", "--out-dir", c, "--threads", 4) == cli.EXIT_OK
    for suffix in ("report.json", "summary.csv", "certificate.json"):
        first = (a / f"depth4_sampled.{suffix}").read_bytes()
        assert first == (b / f"depth4_sampled.{suffix}").read_bytes()
        assert first == (c / f"depth4_sampled.{suffix}").read_bytes()


def test_suite_command(work, capsys):
    assert run("suite", "chebyshev", "--out-dir", work / "s") == cli.EXIT_OK
    assert "PASS" in capsys.readouterr().out
    data = json.loads((work / "s" / "suite-chebyshev.report.json").read_text())
    assert data["suite"] == "chebyshev"
    assert (work / "s" / "suite-chebyshev.summary.csv").exists()
