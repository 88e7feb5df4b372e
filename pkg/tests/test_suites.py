import numpy as np
import pytest

from lsmlab.io import dumps_report, envelope
from lsmlab.suites import SUITES, run_suite


def test_preservation_suite_seed_seven():
    out = run_suite("preservation", seed=7, instances=200, d=2)
    assert out["passed"] and out["instances"] == 200 and out["failures"] == 0


def test_epi_suite_seed_one():
    out = run_suite("epi", seed=1, gaussian_rhos=(0.0, 0.25, 0.5), eps=0.1, n_nodes=16)
    assert out["passed"]
    for row in out["results"]:
        assert row["S"] <= 1e-5 and row["epi_passed"]
        assert row["S_relative_error"] < 1e-6 or row["rho"] == 0.0


def test_counterexample_suite_without_trials_is_vacuous():
    out = run_suite("counterexample", seed=0, trials=0)
    assert out["passed"] and out["general_kernel_witness"] is None


def test_counterexample_suite_reports_general_witness():
    out = run_suite("counterexample", seed=0, trials=200)
    assert out["passed"] and out["general_kernel_witness"] is not None


def test_unknown_suite():
    with pytest.raises(ValueError, match="unknown suite"):
        run_suite("nope")
    assert len(SUITES) == 6


@pytest.mark.parametrize("threads", [1, 4])
def test_reports_do_not_depend_on_thread_count(threads):
    ref = dumps_report(envelope("s", run_suite("transport", seed=3, instances=12, n=401, threads=1), seed=3))
    got = dumps_report(envelope("s", run_suite("transport", seed=3, instances=12, n=401, threads=threads),
                                seed=3))
    assert got == ref


def test_ad_suite_margins_are_nonpositive():
    out = run_suite("fourfn-ad", seed=2, instances=40)
    assert out["passed"] and out["worst_margin"] <= 1e-12
    assert np.all([r["hypothesis_passed"] for r in out["results"]])
