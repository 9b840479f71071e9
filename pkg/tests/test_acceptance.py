"""Acceptance battery: one test per criterion, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v``; a PASS/FAIL line per
criterion is printed in the terminal summary.  ``python3 tests/test_acceptance.py``
prints the same lines without pytest.
"""
import csv
import subprocess
import sys
import time
from pathlib import Path

import pytest

from fqdist import suite

import conftest

pytestmark = pytest.mark.acceptance
SEED = 7


def timed(fn):
    t0 = time.perf_counter()
    out = fn(SEED)
    return out, time.perf_counter() - t0


@pytest.fixture(scope="module")
def moment_results():
    return timed(suite.second_moment_criteria)


def _check(result, seconds, limit=None):
    ok = result.passed and (limit is None or seconds < limit)
    detail = result.detail if limit is None else f"{result.detail}; limit {limit}s"
    conftest.record(result.number, result.name, ok, f"n={result.instances} {detail}", seconds)
    assert result.passed, result.detail
    if limit is not None:
        assert seconds < limit


def test_c01_full_space_distance_set():
    r, s = timed(suite.full_space_delta)
    assert r.instances == 10
    _check(r, s, 5)


def test_c02_isotropic_line():
    r, s = timed(suite.isotropic_line_check)
    _check(r, s, 1)


def test_c03_character_orthogonality():
    r, s = timed(suite.character_orthogonality)
    _check(r, s)


def test_c04_second_moment_identity(moment_results):
    (r4, _, _), s = moment_results
    assert r4.instances >= 50
    _check(r4, s, 60)


def test_c05_second_moment_bounds(moment_results, tmp_path):
    (r4, r5, _), s = moment_results
    suite.write_outputs([r4], tmp_path, SEED)
    rows = list(csv.DictReader((tmp_path / "moments.csv").open()))
    kappas = [float(r["kappa_emp"]) for r in rows if r["kappa_emp"]]
    assert len(kappas) == r5.instances
    assert all(k >= 0 for k in kappas)
    _check(r5, s)


def test_c06_derived_guarantees(moment_results):
    (_, _, r6), s = moment_results
    _check(r6, s)


def test_c07_corollary_pipeline():
    r, s = timed(suite.corollary_pipeline)
    assert r.instances == 50
    _check(r, s)


def test_c08_ir_threshold():
    r, s = timed(suite.ir_threshold_criterion)
    assert r.instances == 30
    _check(r, s)


def test_c09_sumproduct_coverage():
    r, s = timed(suite.sumproduct_coverage)
    _check(r, s, 10)


def test_c10_engine_equivalence():
    r, s = timed(suite.engine_equivalence)
    assert r.instances == 200
    _check(r, s)


def test_c11_cli_suite_is_deterministic(tmp_path):
    t0 = time.perf_counter()
    outs = []
    for run in ("a", "b"):
        out = tmp_path / run
        proc = subprocess.run([sys.executable, "-m", "fqdist", "verify", "--suite", "paper", "--seed", str(SEED),
                               "--out", str(out)], capture_output=True, text=True)
        assert proc.returncode == 0, proc.stdout + proc.stderr
        outs.append(out)
    seconds = time.perf_counter() - t0
    names = sorted(p.name for p in outs[0].iterdir())
    same = names == sorted(p.name for p in outs[1].iterdir()) and all(
        (outs[0] / n).read_bytes() == (outs[1] / n).read_bytes() for n in names)
    ok = same and seconds < 300
    conftest.record(11, "determinism", ok, f"{len(names)} CSVs byte-identical={same}; limit 300s", seconds)
    assert same
    assert seconds < 300


if __name__ == "__main__":
    sys.path.insert(0, str(Path(__file__).parent))
    results = suite.run_suite(SEED)
    for r in results:
        conftest.record(r.number, r.name, r.passed, f"n={r.instances} {r.detail}", r.seconds)
    sys.exit(0 if all(r.passed for r in results) else 1)
