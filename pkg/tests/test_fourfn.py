import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lsmlab.fourfn import (DegenerateMeanWarning, FourFnInstance, MeanSpec, ad_instance,
                           check_ad_continuous_limit, check_ad_discrete, check_cem, check_general_pl,
                           check_unified, general_pl_instance, generalized_mean,
                           unified_pair_is_proven)
from lsmlab.lattice import LatticeFunction
from lsmlab.models import FunctionModel, Gaussian, Mixture, PowerExp

pos = st.floats(1e-3, 1e3)
lam = st.floats(0.01, 0.99)


def test_generalized_mean_closed_forms():
    assert generalized_mean(MeanSpec(1.0, 0.25), 4.0, 8.0) == pytest.approx(7.0)
    assert generalized_mean(MeanSpec(0.0, 0.5), 4.0, 9.0) == pytest.approx(6.0)
    assert generalized_mean(MeanSpec(-1.0, 0.5), 1.0, 3.0) == pytest.approx(1.5)
    assert generalized_mean(MeanSpec(np.inf, 0.3), 2.0, 5.0) == 5.0
    assert generalized_mean(MeanSpec(-np.inf, 0.3), 2.0, 5.0) == 2.0


def test_generalized_mean_endpoint_weights():
    assert generalized_mean(MeanSpec(2.0, 1.0), 3.0, 7.0) == 3.0
    assert generalized_mean(MeanSpec(2.0, 0.0), 3.0, 7.0) == 7.0


def test_generalized_mean_zero_argument_warns():
    with pytest.warns(DegenerateMeanWarning):
        assert generalized_mean(MeanSpec(0.0, 0.5), 0.0, 4.0) == 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert generalized_mean(MeanSpec(1.0, 0.5), 0.0, 4.0) == pytest.approx(2.0)


def test_generalized_mean_rejects_bad_inputs():
    with pytest.raises(ValueError):
        MeanSpec(1.0, 1.5)
    with pytest.raises(ValueError):
        generalized_mean(MeanSpec(1.0, 0.5), -1.0, 2.0)


def test_generalized_mean_extreme_exponents_do_not_overflow():
    v = generalized_mean(MeanSpec(-80.0, 0.5), 1e300, 1e-300)
    assert np.isfinite(v) and v == pytest.approx(1e-300 * 2 ** (1 / 80))
    assert np.isfinite(generalized_mean(MeanSpec(80.0, 0.5), 1e300, 1e-300))


@given(pos, pos, lam, st.floats(-20, 20), st.floats(-20, 20))
def test_power_mean_is_monotone_in_exponent(x, y, w, a, b):
    lo, hi = sorted((a, b))
    m_lo = generalized_mean(MeanSpec(lo, w), x, y)
    m_hi = generalized_mean(MeanSpec(hi, w), x, y)
    assert m_lo <= m_hi * (1 + 1e-12)
    assert min(x, y) * (1 - 1e-12) <= m_lo and m_hi <= max(x, y) * (1 + 1e-12)


@given(pos, pos, lam, st.floats(-10, 10), st.floats(0.1, 10))
def test_power_mean_is_homogeneous(x, y, w, a, c):
    assert generalized_mean(MeanSpec(a, w), c * x, c * y) == pytest.approx(
        c * generalized_mean(MeanSpec(a, w), x, y), rel=1e-9)


# hand-checked on {0, 1}: mu = 1, phi = (1, 2), psi = (1, 3)
F1, F2, F3, F4 = [1.0, 2.0], [1.0, 3.0], [1.0, 1.0], [1.0, 6.0]


def test_ad_two_point_example():
    hyp, concl = check_ad_discrete(F1, F2, F3, F4)
    assert hyp.passed and concl.passed
    assert concl.details["lhs"] == 12.0 and concl.details["rhs"] == 14.0
    assert hyp.pairs_checked == 4


def test_ad_two_point_violation_witness():
    hyp, _ = check_ad_discrete([1.0, 5.0], F2, F3, F4)
    assert not hyp.passed
    assert hyp.worst_violation == pytest.approx(15.0 - 6.0)
    assert hyp.witness == [[1], [1]]


def test_ad_equal_functions_give_equality():
    rng = np.random.default_rng(1)
    tag, quad = ad_instance(rng, 0)
    assert tag == "fkg_degenerate"
    hyp, concl = check_ad_discrete(*quad)
    assert hyp.passed and concl.worst_violation == 0.0


def test_ad_aligns_different_boxes():
    a = LatticeFunction((0,), np.array([1.0, 2.0]))
    b = LatticeFunction((1,), np.array([3.0]))
    hyp, concl = check_ad_discrete(a, b, a, a)
    assert concl.details["integrals"] == [3.0, 3.0, 3.0, 3.0]


def test_ad_sampled_hypothesis_is_marked():
    v = np.ones((6, 6))
    hyp, _ = check_ad_discrete(v, v, v, v, max_pairs=100, seed=3)
    assert hyp.details["sampled"] and hyp.details["seed"] == 3


def test_ad_continuous_limit_converges_for_gaussians():
    g = Gaussian.bivariate(0.5)
    rows = check_ad_continuous_limit([g] * 4, [-4, -4], [4, 4], [0.4, 0.2])
    assert all(r["hypothesis_passed"] for r in rows)
    assert all(abs(r["gap"]) < 1e-12 for r in rows)
    assert rows[1]["lhs"] == pytest.approx(1.0, abs=1e-3)


def test_cem_gaussian_equality_and_bimodal_failure():
    g = Gaussian.standard(1)
    hyp, concl = check_cem(g, g, g, g, 0.3, [-8.0], [8.0], samples=5000)
    assert hyp.passed and concl.passed
    assert abs(concl.details["relative_gap"]) < 1e-9
    bimodal = Mixture((Gaussian([-3.0], [[0.3]]), Gaussian([3.0], [[0.3]])), [0.5, 0.5])
    hyp, _ = check_cem(bimodal, bimodal, bimodal, bimodal, 0.5, [-8.0], [8.0], samples=5000)
    assert not hyp.passed
    x, y = hyp.witness
    assert x[0] * y[0] < 0  # the two modes


def test_cem_rejects_endpoint_lambda():
    g = Gaussian.standard(1)
    with pytest.raises(ValueError):
        check_cem(g, g, g, g, 1.0, [-1.0], [1.0])


def test_unified_lattice_route_matches_ad():
    fs = [LatticeFunction.from_values(v) for v in (F1, F2, F3, F4)]
    hyp, concl = check_unified(*fs, alpha=-np.inf, beta=np.inf, t=0.5)
    assert concl.details["route"] == "ad_discrete" and concl.details["lhs"] == 12.0
    with pytest.raises(ValueError):
        check_unified(*fs, alpha=1.0, beta=1.0, t=0.5)


def test_unified_marks_exploratory_pairs():
    assert unified_pair_is_proven(1.0, 1.0) and unified_pair_is_proven(0.5, 0.0)
    assert not unified_pair_is_proven(2.0, 1.0)
    f = PowerExp(1.0, 1.0, 1.0)
    hyp, _ = check_unified(f, f, f, f, 2.0, 1.0, 0.5, [0.1], [20.0], samples=2000)
    assert hyp.details["proven_pair"] is False


def test_unified_needs_positive_support_for_nonpositive_exponent():
    f = PowerExp()
    with pytest.raises(ValueError):
        check_unified(f, f, f, f, 0.0, 1.0, 0.5, [0.0], [5.0])


def test_general_instance_rejects_inconsistent_m():
    f = PowerExp()
    with pytest.raises(ValueError):
        FourFnInstance(f, f, f, f, [0.1], [5.0], r=0.5, s=0.5, t=0.5, m=0.9)
    inst = FourFnInstance(f, f, f, f, [0.1], [5.0], r=0.25, s=0.2, t=0.6)
    assert inst.m == pytest.approx(0.25 * 0.2 + 0.75 * 0.6)


def test_general_pl_equal_functions_give_equality():
    inst = general_pl_instance(np.random.default_rng(0), 0)
    hyp, concl = check_general_pl(inst, samples=4000)
    assert hyp.passed and concl.passed
    assert abs(concl.details["relative_gap"]) < 1e-9


def test_general_pl_detects_broken_hypothesis():
    F = PowerExp(1.0, 1.0, 1.0)
    big = FunctionModel(lambda z: 5.0 * F(z))
    inst = FourFnInstance(big, big, F, F, [1e-6], [40.0], r=0.5, s=0.5, t=0.5)
    hyp, concl = check_general_pl(inst, samples=2000)
    assert not hyp.passed and not concl.passed


@settings(max_examples=12, deadline=None)
@given(st.integers(0, 10_000))
def test_generated_general_instances_satisfy_hypothesis(k):
    inst = general_pl_instance(np.random.default_rng(k), k)
    hyp, concl = check_general_pl(inst, samples=2000)
    assert hyp.passed and concl.passed


@pytest.mark.filterwarnings("ignore::lsmlab.fourfn.DegenerateMeanWarning")
@pytest.mark.parametrize("a", [5e-324, -5e-324, 1e-12, -1e-9])
def test_tiny_exponents_approach_geometric_mean(a):
    assert generalized_mean(MeanSpec(a, 0.3), 2.0, 50.0) == pytest.approx(2.0 ** 0.3 * 50.0 ** 0.7, rel=1e-8)
    assert generalized_mean(MeanSpec(a, 0.3), 0.0, 50.0) == 0.0
