import json
import subprocess
import sys

import pytest

from fqdist import PinSpec, distance_spectrum, field_of_order
from fqdist.analysis import theorem_check_distpinned
from fqdist.cli import main
from fqdist.fqset import load_pointset, save_pointset
from fqdist.vecspace import random_set


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_field_info(capsys):
    code, out, _ = run(capsys, "field-info", "--p", "3", "--k", "2")
    assert code == 0
    assert "q=9" in out and "modulus=x^2 + 1" in out
    code, out, _ = run(capsys, "field-info", "--q", "8", "--json")
    assert json.loads(out)["modulus"] == [1, 1, 0, 1]


def test_line_then_delta(capsys, tmp_path):
    z = tmp_path / "z.fqset"
    assert run(capsys, "gen", "--kind", "line", "--q", "5", "--out", str(z))[0] == 0
    code, out, _ = run(capsys, "delta", "--in", str(z))
    assert code == 0 and out.strip() == "support_size=1 support=[0]"


def test_delta_full_space(capsys):
    code, out, _ = run(capsys, "delta", "--gen", "full", "--q", "7", "--d", "2")
    assert out.startswith("support_size=7 ")
    code, out, _ = run(capsys, "delta", "--gen", "full", "--q", "7", "--exclude-zero", "--json")
    assert json.loads(out) == {"support_size": 6, "support": [1, 2, 3, 4, 5, 6]}


def test_verify_matches_library(capsys, tmp_path):
    E = random_set(field_of_order(13), 3, 169, 3)
    path = tmp_path / "e.fqset"
    save_pointset(E, path)
    code, out, _ = run(capsys, "verify", "--check", "distpinned", "--in", str(path), "--pin", "2,3", "--json")
    assert code == 0
    assert json.loads(out) == theorem_check_distpinned(E, PinSpec(2, 3)).to_dict()
    code, out, _ = run(capsys, "verify", "--check", "distpinned", "--in", str(path), "--pin", "2,3")
    assert "flag.derived_guarantee=PASS" in out


@pytest.mark.parametrize("argv", [
    ["verify", "--check", "dot", "--gen", "random", "--q", "7", "--n", "30", "--pin", "1,2", "--identity"],
    ["verify", "--check", "cs", "--gen", "random", "--q", "9", "--n", "30", "--pin", "1,2"],
    ["verify", "--check", "identity", "--gen", "random", "--q", "9", "--n", "30", "--pin", "1,2", "--metric", "dot"],
    ["verify", "--check", "bound", "--gen", "random", "--q", "9", "--n", "30", "--pin", "1,2"],
    ["verify", "--check", "sumproduct", "--gen", "random", "--q", "101", "--d", "1", "--n", "33"],
    ["verify", "--check", "shparlinski", "--gen", "random", "--q", "31", "--d", "1", "--n", "20", "--z", "3"],
    ["verify", "--check", "ir", "--gen", "full", "--q", "5", "--d", "3"],
    ["verify", "--check", "corollary", "--gen", "random_product", "--q", "13", "--d", "3", "--sizes", "4,5,6"],
])
def test_verify_checks_pass(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, out + err


def test_spectrum_csv_golden(capsys, tmp_path):
    E = random_set(field_of_order(9), 2, 20, 4)
    path = tmp_path / "e.fqset"
    save_pointset(E, path)
    code, out, _ = run(capsys, "spectrum", "--in", str(path), "--engine", "conv")
    assert out == distance_spectrum(E, E, "conv").to_csv()
    code, out, _ = run(capsys, "spectrum", "--gen", "random", "--q", "9", "--n", "20", "--seed", "4")
    assert out.splitlines()[2:] == distance_spectrum(E, E).to_csv().splitlines()[2:]
    assert out.splitlines()[0].endswith("seed=4")


def test_gen_seed_determines_output(capsys):
    a = run(capsys, "gen", "--kind", "random", "--q", "7", "--d", "3", "--n", "40", "--seed", "5")[1]
    b = run(capsys, "gen", "--kind", "random", "--q", "7", "--d", "3", "--n", "40", "--seed", "5")[1]
    c = run(capsys, "gen", "--kind", "random", "--q", "7", "--d", "3", "--n", "40", "--seed", "6")[1]
    assert a == b != c


def test_pins(capsys):
    code, out, _ = run(capsys, "pins", "--gen", "product", "--q", "7", "--factors", "0,1,5;2,3", "--json")
    data = json.loads(out)
    assert data["pins"][0] == {"j": 1, "slice_size": 2, "z": [0, 1, 5]}
    assert data["best"] == [2, 2]  # forgetting coordinate 2 keeps 3 points


def test_fmt_convert(capsys, tmp_path):
    E = random_set(field_of_order(4), 3, 11, 0)
    src = tmp_path / "e.fqset"
    save_pointset(E, src)
    dst = tmp_path / "e.jsonl"
    assert run(capsys, "fmt-convert", "--in", str(src), "--out", str(dst))[0] == 0
    assert load_pointset(dst) == E


def test_search(capsys, tmp_path):
    out_path = tmp_path / "best.fqset"
    code, out, _ = run(capsys, "search", "--q", "13", "--sizes", "4,4", "--steps", "200", "--seed", "2",
                       "--out", str(out_path), "--json")
    data = json.loads(out)
    assert data["delta_size"] <= data["initial_delta"]
    assert load_pointset(out_path).size == 16


def test_sweep_exit_codes(capsys, tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('fields = [5]\ndims = [2]\nsizes = [10]\nseeds = 3\nchecks = ["cs_chain"]\n')
    out = tmp_path / "r.csv"
    code, text, _ = run(capsys, "sweep", "--config", str(cfg), "--out", str(out))
    assert code == 0 and "rows=3 failed=0" in text
    assert len(out.read_text().splitlines()) == 4


def test_usage_errors_exit_64(capsys):
    assert run(capsys, "verify", "--check", "distpinned", "--gen", "full", "--q", "5")[0] == 64
    assert run(capsys, "delta", "--pin", "banana", "--gen", "full", "--q", "5")[0] == 64
    assert run(capsys, "frobnicate")[0] == 64
    assert run(capsys, "delta")[0] == 64
    assert run(capsys, "field-info")[0] == 64


def test_operational_errors_exit_1(capsys, tmp_path):
    code, _, err = run(capsys, "field-info", "--p", "4")
    assert code == 1 and "NonPrime" in err
    bad = tmp_path / "bad.fqset"
    bad.write_text("FQSET 1 3 2 2,0,1 2 1\n0 0\n")
    code, _, err = run(capsys, "delta", "--in", str(bad))
    assert code == 1 and "BadModulus" in err
    assert run(capsys, "delta", "--in", str(tmp_path / "missing.fqset"))[0] == 1


def test_assertion_failure_exit_2(capsys, monkeypatch):
    import fqdist.analysis as an
    monkeypatch.setattr(an, "KAPPA", {"distance": -10 ** 9, "dot": -10 ** 9})
    code, _, _ = run(capsys, "verify", "--check", "bound", "--gen", "random", "--q", "7", "--n", "20", "--pin", "1,1")
    assert code == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fqdist", "field-info", "--q", "9"],
                          capture_output=True, text=True, check=True)
    assert "modulus=x^2 + 1" in proc.stdout
