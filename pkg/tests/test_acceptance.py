"""End-to-end checks of the acceptance criteria, one PASS/FAIL line each.

Values tagged [PAPER] are the tabulated radii and eigenvalues; the other
oracles live in the property suites that criterion 5 re-runs.
"""
import csv
import json
import subprocess
import sys
import time
from pathlib import Path

import pytest

from crossdiff import certificate as certs
from crossdiff.cli import main

TESTS = Path(__file__).parent

# [PAPER] validation radii at d=0.005, m=500, nu=1.06
TABLE_RADIUS = {"a": 2.5968e-11, "b": 9.8961e-12, "h": 2.9001e-12}
# [PAPER] unstable eigenvalues, n=1000, gamma=1.0001
TABLE_LAMBDA = {"b": 0.0153, "h": 0.2743}
# how each solution is reached from the homogeneous state
RECIPE = {
    "h": [],
    "a": ["--seed-mode", "1"],
    "b": ["--seed-mode", "3", "--reflect"],
}


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")


def cli(*argv):
    return main([str(a) for a in argv])


def sig3(x):
    return float(f"{x:.3g}")


@pytest.fixture(scope="module")
def work(tmp_path_factory):
    return tmp_path_factory.mktemp("acceptance")


@pytest.fixture(scope="module")
def steady_005(work):
    out = {}
    for label, extra in RECIPE.items():
        path = work / f"steady_{label}.json"
        code = cli("validate-steady", "--d", "0.005", "--m", 500, "--nu", "1.06", *extra, "--out", path)
        out[label] = (code, path)
    return out


def test_criterion_1_homogeneous_branch(work, capsys):
    out = work / "branch.csv"
    t0 = time.perf_counter()
    code = cli("validate-branch", "--d-range", "0.004:0.06:10", "--m", 50, "--nu", "1.06",
               "--cert-dir", work / "branch", "--out", out)
    elapsed = time.perf_counter() - t0
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    radii = [float(r["radius"]) for r in rows if r["status"] == "VALID"]
    ok = code == 0 and len(rows) == 10 and len(radii) == 10 and max(radii) <= 1e-8 and elapsed <= 60
    report(capsys, 1, ok, f"{len(radii)}/10 VALID, max r={max(radii, default=float('nan')):.2e}, {elapsed:.1f}s")
    assert ok


def test_criterion_2_table_one(steady_005, capsys):
    lines, good = [], []
    for label, (code, path) in steady_005.items():
        doc = certs.load(path)
        r = certs.num(doc["r_min"])
        ratio = r / TABLE_RADIUS[label] if r else float("inf")
        hit = code == 0 and doc["valid"] and 1e-3 <= ratio <= 1e3
        if hit:
            good.append(label)
        lines.append(f"({label}) v(0)={float(doc['v0']):.4f} r={r} ratio={ratio:.2g}")
    ok = len(good) >= 3 and "h" in good
    report(capsys, 2, ok, "; ".join(lines))
    assert ok


@pytest.mark.parametrize("label", ["b", "h"])
def test_criterion_3_table_two(label, steady_005, work, capsys):
    code0, spath = steady_005[label]
    assert code0 == 0
    epath = work / f"eigen_{label}.json"
    code = cli("prove-instability", "--steady", spath, "--n", 1000, "--gamma", "1.0001",
               "--target", TABLE_LAMBDA[label], "--out", epath)
    doc = certs.load(epath)
    lam = float(doc["lambda_re"])
    r = float(doc["r_min"])
    ok = (code == 0 and doc["valid"] and sig3(lam) == sig3(TABLE_LAMBDA[label])
          and abs(float(doc["lambda_im"])) <= r and lam - r > 0)
    report(capsys, 3, ok, f"({label}) lambda={lam:.6g} r={r:.2e} Re(lambda)-r={float(doc['re_margin']):.4g}")
    assert ok


def test_criterion_4_no_unstable_candidate(steady_005, work, capsys):
    code_a = cli("prove-instability", "--steady", steady_005["a"][1], "--n", 1000, "--out", work / "none_a.json")
    s06 = work / "steady_h06.json"
    assert cli("validate-steady", "--d", "0.06", "--m", 50, "--out", s06) == 0
    code_h = cli("prove-instability", "--steady", s06, "--n", 1000, "--out", work / "none_h06.json")
    kinds = [certs.load(work / f)["kind"] for f in ("none_a.json", "none_h06.json")]
    ok = code_a == 20 and code_h == 20 and kinds == [certs.NO_UNSTABLE] * 2
    report(capsys, 4, ok, f"(a) exit {code_a}, homogeneous d=0.06 exit {code_h}")
    assert ok


SUITES = {
    "Banach algebra inequality": ["test_seqspace.py::test_banach_algebra_inequality"],
    "brute-force convolution": ["test_seqspace.py::test_convolution_matches_brute_force"],
    "interval containment fuzzing": ["test_interval.py::test_containment_fuzz_binary",
                                     "test_interval.py::test_containment_fuzz_sqrt"],
    "op_norm soundness": ["test_seqspace.py::test_op_norm_soundness"],
    "Phi soundness": ["test_seqspace.py::test_phi_bound_soundness"],
    "Upsilon soundness": ["test_seqspace.py::test_upsilon_soundness"],
    "DF vs finite differences": ["test_steady.py::test_jacobian_against_finite_differences",
                                 "test_eigen.py::test_eigen_jacobian_against_finite_differences"],
    "constant-coefficient eigen oracle": [
        "test_eigen.py::test_validated_eigenvalue_matches_constant_coefficient_oracle"],
}


@pytest.mark.parametrize("suite", list(SUITES))
def test_criterion_5_property_suites(suite, capsys):
    ids = [str(TESTS / t) for t in SUITES[suite]]
    t0 = time.perf_counter()
    res = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *ids],
                         capture_output=True, text=True, cwd=TESTS.parent)
    elapsed = time.perf_counter() - t0
    summary = res.stdout.strip().splitlines()[-1] if res.stdout.strip() else res.stderr[-200:]
    ok = res.returncode == 0 and elapsed < 120
    report(capsys, 5, ok, f"{suite}: {summary} ({elapsed:.1f}s)")
    assert ok


def test_criterion_6_verify_everything(work, capsys):
    # runs last in file order, so every certificate above is present
    files = sorted(work.rglob("*.json"))
    res = subprocess.run([sys.executable, "-m", "crossdiff", "verify", *map(str, files)],
                         capture_output=True, text=True)
    lines = res.stdout.strip().splitlines()
    ok = res.returncode == 0 and len(lines) == len(files) and all(x.startswith("OK") for x in lines)
    report(capsys, 6, ok, f"{sum(x.startswith('OK') for x in lines)}/{len(files)} certificates re-verified")
    assert ok
