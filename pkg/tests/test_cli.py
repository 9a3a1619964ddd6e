import csv
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from crossdiff import certificate as certs
from crossdiff.cli import ConfigError, main, parse_d_range


def run(*argv):
    return main([str(a) for a in argv])


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture(scope="module")
def certdir(tmp_path_factory):
    """Two steady certificates (d=0.005 and d=0.06, m=50) with their eigen outcomes."""
    d = tmp_path_factory.mktemp("certs")
    assert run("validate-steady", "--d", "0.005", "--m", 50, "--out", d / "s005.json") == 0
    assert run("validate-steady", "--d", "0.06", "--m", 50, "--out", d / "s06.json") == 0
    assert run("prove-instability", "--steady", d / "s005.json", "--n", 64, "--target", "0.2743",
               "--out", d / "e005.json") == 0
    assert run("prove-instability", "--steady", d / "s06.json", "--n", 64, "--out", d / "u06.json") == 20
    return d


# -- d-range parsing -------------------------------------------------------------------------------


def test_d_range_endpoints_are_exact():
    assert parse_d_range("0.004:0.06:10")[0] == "0.004"
    assert parse_d_range("0.004:0.06:10")[-1] == "0.06"
    assert parse_d_range("0.01:0.03:3") == ["0.01", "0.02", "0.03"]


def test_d_range_sorts_and_deduplicates():
    assert parse_d_range(["0.03", "0.01", "0.03"]) == ["0.01", "0.03"]
    assert parse_d_range("0.03:0.01:3") == ["0.01", "0.02", "0.03"]
    assert parse_d_range("0.01:0.02:0") == []


@pytest.mark.parametrize("bad", ["0.01:0.02", "a:0.02:3", "0.01:0.02:x", "-0.01:0.02:3", "0.01:0.02:-1"])
def test_bad_d_range(bad):
    with pytest.raises(ConfigError):
        parse_d_range(bad)


# -- usage errors -------------------------------------------------------------------------------------


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["validate-steady", "--m", "10"],
    ["validate-steady", "--d", "0.01", "--nu", "1"],
    ["validate-steady", "--d", "0.01", "--nu", "0.9"],
    ["validate-steady", "--d", "abc"],
    ["validate-steady", "--d", "0.01", "--m", "0"],
    ["validate-branch", "--d-range", "0.01:0.02"],
    ["validate-branch", "--d-range", "0.01:0.02:2", "--workers", "0"],
    ["validate-steady", "--d", "0.01", "--seed-sign", "2"],
    ["verify", "/nonexistent/file.json"],
    ["export-diagram", "/nonexistent/dir"],
])
def test_usage_errors_exit_1(argv, capsys):
    assert main(argv) == 1
    assert capsys.readouterr().err


def test_unknown_config_key_exits_1(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"d": 0.01, "m": 10, "colour": "red"}))
    assert run("validate-steady", "--params", cfg) == 1
    cfg.write_text(json.dumps({"d": 0.01, "m": 10, "params": {"q9": 1}}))
    assert run("validate-steady", "--params", cfg) == 1


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"d": 0.02, "m": 20, "nu": 1.06}))
    out = tmp_path / "s.json"
    assert run("validate-steady", "--params", cfg, "--d", "0.03", "--out", out) == 0
    doc = certs.load(out)
    assert doc["params"]["d1"] == "0.03" and doc["m"] == 20 and float(doc["nu"]) == 1.06


def test_gamma_ordering_is_a_usage_error(certdir, tmp_path):
    s = certdir / "s005.json"
    assert run("prove-instability", "--steady", s, "--gamma", "1.07", "--n", 32) == 1
    assert run("prove-instability", "--steady", s, "--gamma", "1", "--n", 32) == 1
    assert run("prove-instability", "--steady", s, "--gamma", "1.01", "--gamma-tilde", "1.005",
               "--n", 32) == 1


def test_tampered_steady_certificate_is_rejected(certdir, tmp_path):
    doc = json.loads((certdir / "s005.json").read_text())
    doc["Y"] = "1e-20"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    assert run("prove-instability", "--steady", bad, "--n", 32) == 1


def test_too_few_modes_is_a_proof_failure(tmp_path):
    out = tmp_path / "s.json"
    assert run("validate-steady", "--d", "0.03", "--m", 8, "--out", out) == 10
    doc = certs.load(out)
    assert not doc["valid"] and "Z0 + Z1" in doc["failure"]
    assert run("verify", out) == 10


# -- branch ------------------------------------------------------------------------------------------


def test_empty_range_writes_only_the_header(tmp_path):
    out = tmp_path / "b.csv"
    assert run("validate-branch", "--d-range", "0.01:0.02:0", "--m", 10, "--out", out) == 0
    assert rows(out) == [["d", "v0", "radius", "status"]]


def test_branch_rows_are_ordered_and_independent_of_workers(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("validate-branch", "--d-range", "0.05:0.01:5", "--m", 20, "--out", a) == 0
    assert run("validate-branch", "--d-range", "0.05:0.01:5", "--m", 20, "--workers", 3, "--out", b) == 0
    ra, rb = rows(a), rows(b)
    assert ra == rb
    assert [r[0] for r in ra[1:]] == ["0.01", "0.02", "0.03", "0.04", "0.05"]
    assert all(r[3] == "VALID" and float(r[2]) > 0 for r in ra[1:])


def test_branch_cert_dir(tmp_path):
    out = tmp_path / "b.csv"
    assert run("validate-branch", "--d-range", "0.02:0.03:2", "--m", 20, "--out", out,
               "--cert-dir", tmp_path / "c") == 0
    names = sorted(p.name for p in (tmp_path / "c").iterdir())
    assert names == ["steady_d0.02.json", "steady_d0.03.json"]
    assert run("verify", tmp_path / "c") == 0


# -- instability and diagram -------------------------------------------------------------------------


def test_stable_state_records_no_claim(certdir):
    doc = certs.load(certdir / "u06.json")
    assert doc["kind"] == certs.NO_UNSTABLE
    assert float(doc["leading_lambda_re"]) <= 0


def test_verify_all(certdir, capsys):
    assert run("verify", certdir) == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 4 and all(line.startswith("OK") for line in out)


def test_verify_eigen_needs_its_steady_reference(certdir, capsys):
    assert run("verify", certdir / "e005.json") == 10
    assert run("verify", certdir / "e005.json", "--steady", certdir / "s005.json") == 0


def test_verify_reports_tampering(certdir, tmp_path, capsys):
    doc = json.loads((certdir / "s06.json").read_text())
    doc["Z1"] = "0.1"
    (tmp_path / "t.json").write_text(json.dumps(doc))
    assert run("verify", tmp_path / "t.json") == 10
    assert "hash mismatch" in capsys.readouterr().out


def test_export_diagram_statuses(certdir, tmp_path):
    d = tmp_path / "mix"
    d.mkdir()
    for name in ("s005.json", "s06.json", "e005.json", "u06.json"):
        (d / name).write_bytes((certdir / name).read_bytes())
    # a third steady state with no eigen record, plus junk
    assert run("validate-steady", "--d", "0.03", "--m", 20, "--out", d / "s03.json") == 0
    (d / "junk.json").write_text("{")
    (d / "notes.txt").write_text("ignored")
    out = tmp_path / "diag.csv"
    assert run("export-diagram", d, "--out", out) == 0
    got = rows(out)
    assert got[0] == ["d", "v0", "status"]
    assert [(r[0], r[2]) for r in got[1:]] == [
        ("0.005", "proved+unstable"), ("0.03", "proved"), ("0.06", "proved+no-unstable-found")]
    assert float(got[1][1]) == pytest.approx(0.125)


def test_export_diagram_empty_directory(tmp_path):
    out = tmp_path / "diag.csv"
    assert run("export-diagram", tmp_path, "--out", out) == 0
    assert rows(out) == [["d", "v0", "status"]]


def test_certificates_are_deterministic(tmp_path):
    env = dict(os.environ, SOURCE_DATE_EPOCH="0")
    outs = []
    for name in ("a.json", "b.json"):
        p = tmp_path / name
        r = subprocess.run([sys.executable, "-m", "crossdiff", "validate-steady", "--d", "0.02", "--m", "16",
                            "--out", str(p)], env=env, capture_output=True, text=True)
        assert r.returncode == 0, r.stderr
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]


def test_module_entry_point_usage_error():
    r = subprocess.run([sys.executable, "-m", "crossdiff", "validate-steady", "--nu", "0.5", "--d", "0.01"],
                       capture_output=True, text=True)
    assert r.returncode == 1 and "nu" in r.stderr
