import json
import subprocess
import sys

import numpy as np
import pytest

from lsmlab.cli import main
from lsmlab.io import save
from lsmlab.lattice import LatticeFunction


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, (json.loads(out.out) if out.out.strip() else None), out.err


@pytest.fixture
def files(tmp_path):
    i, j = np.indices((3, 3))
    save(LatticeFunction.from_values(np.exp(i * j)), tmp_path / "good.json")
    save(LatticeFunction.from_values(np.exp(-i * j)), tmp_path / "bad.json")
    x = np.linspace(-8, 8, 801)
    for name, mu, sd in (("n1", 0.0, 1.0), ("n2", 0.0, 2.0), ("n3", 1.0, 1.0)):
        v = np.exp(-0.5 * ((x - mu) / sd) ** 2)
        v /= np.trapezoid(v, x)
        rows = "\n".join(f"{float(a)!r},{float(b)!r}" for a, b in zip(x, v))
        (tmp_path / f"{name}.csv").write_text(rows + "\n")
    return tmp_path


def test_check_lsm_exit_codes(capsys, files):
    code, rep, _ = run(capsys, "check-lsm", files / "good.json", "--method", "both")
    assert code == 0 and rep["passed"] and rep["check"] == "check_lsm"
    code, rep, _ = run(capsys, "check-lsm", files / "bad.json")
    assert code == 1 and rep["result"]["witness"]


def test_schema_error_exit_code(capsys, tmp_path):
    (tmp_path / "x.json").write_text(json.dumps({"kind": "grid", "dim": 9}))
    code, rep, err = run(capsys, "check-lsm", tmp_path / "x.json")
    assert code == 2 and rep is None and "'dim'" in err
    code, _, err = run(capsys, "check-lsm", tmp_path / "missing.json")
    assert code == 2


def test_global_flags_before_subcommand(capsys, files):
    out = files / "r.json"
    code, _, _ = run(capsys, "--seed", 5, "--out", out, "check-lsm", files / "good.json")
    assert code == 0 and json.loads(out.read_text())["seed"] == 5


def test_convolve_writes_output(capsys, files):
    code, rep, _ = run(capsys, "convolve", files / "good.json", files / "good.json",
                       "-o", files / "h.json")
    assert code == 0 and rep["result"]["shape"] == [5, 5]
    code, rep, _ = run(capsys, "check-lsm", files / "h.json")
    assert code == 0


def test_verify_preservation_with_binomial_kernel(capsys, files):
    code, rep, _ = run(capsys, "verify-preservation", "--f", files / "good.json", "--kernel", "binomial")
    assert code == 0 and rep["passed"]


def test_counterexample_search_exit_codes(capsys):
    code, rep, _ = run(capsys, "counterexample-search", "--trials", 100)
    assert code == 0 and rep["result"]["found"]
    code, rep, _ = run(capsys, "counterexample-search", "--trials", 50, "--product-kernel")
    assert code == 0 and not rep["result"]["found"]


def test_fourfn_cem_from_spec(capsys, tmp_path):
    g = {"family": "gaussian", "mean": [0.0], "cov": [[1.0]]}
    (tmp_path / "s.json").write_text(json.dumps({"functions": [g] * 4, "lower": [-8], "upper": [8],
                                                 "lambda": 0.3}))
    code, rep, _ = run(capsys, "fourfn", "cem", "--spec", tmp_path / "s.json", "--samples", 2000)
    assert code == 0 and rep["result"]["conclusion_asserted"]


def test_fourfn_spec_needs_four_functions(capsys, tmp_path):
    (tmp_path / "s.json").write_text(json.dumps({"functions": []}))
    code, _, err = run(capsys, "fourfn", "ad", "--spec", tmp_path / "s.json")
    assert code == 2 and "functions" in err


def test_transport_actions(capsys, files):
    code, rep, _ = run(capsys, "transport", "map", "--nu1", files / "n1.csv", "--nu2", files / "n3.csv")
    assert code == 0
    code, rep, _ = run(capsys, "transport", "displacement", "--nu1", files / "n1.csv",
                       "--nu2", files / "n2.csv", "--emit-curves", files / "c.csv")
    assert code == 0 and abs(rep["result"]["worst_violation"]) < 1e-8
    assert (files / "c.csv").read_text().startswith("x,")


def test_transport_alpha_accepts_minus_infinity(capsys, files):
    code, rep, _ = run(capsys, "transport", "pushforward", "--nu1", files / "n1.csv",
                       "--nu2", files / "n2.csv", "--alpha=-inf")
    assert code == 0


def test_epi_experiment_gaussian(capsys):
    code, rep, _ = run(capsys, "epi-experiment", "--p", "gaussian:0.5", "--eps", 0.1, "--nodes", 16)
    assert code == 0
    assert rep["result"]["details"]["mode"] == "corollary"


def test_run_suite_is_deterministic(capsys):
    a = run(capsys, "run-suite", "fourfn-ad", "--instances", 8, "--seed", 4)
    b = run(capsys, "run-suite", "fourfn-ad", "--instances", 8, "--seed", 4)
    assert a[0] == 0 and a[1] == b[1]


def test_console_entry_point_bytes_identical(tmp_path):
    cmd = [sys.executable, "-m", "lsmlab.cli", "run-suite", "preservation", "--instances", "5",
           "--seed", "2"]
    first = subprocess.run(cmd, capture_output=True, check=True).stdout
    second = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert first == second and json.loads(first)["passed"]
