"""Exit criteria of the lab, one test per criterion, each with its runtime budget."""
import time

import numpy as np
import pytest

from lsmlab.convolve import (gaussian_kernel_grid, kernel_condition_check, make_product_kernel,
                             preservation_check, random_log_concave_1d, random_lsm_lattice,
                             random_smooth_lsm_model)
from lsmlab.epi import (FlowParams, JointDensity2D, compute_S, conditional_epi_check, fisher_cross_term,
                        gaussian_S_oracle, ou_flow)
from lsmlab.fourfn import check_ad_continuous_limit
from lsmlab.lattice import LatticeFunction, restrict_to_lattice
from lsmlab.lsm import is_log_supermodular, log_minor_margin, topkis_local_check
from lsmlab.models import FunctionModel, Gaussian
from lsmlab.suites import fourfn_ad_suite, fourfn_general_suite, preservation_suite, transport_suite
from lsmlab.transport import Density1D, derivative_bound_check, displacement_convexity_check, random_density

pytestmark = pytest.mark.acceptance

TWO_PI_E = 2 * np.pi * np.e


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start

    @property
    def ok(self):
        return self.elapsed < self.seconds

    def __str__(self):
        return f"{self.elapsed:.1f}s of {self.seconds:.0f}s"


def test_01_lattice_preservation(verdict):
    with Budget(60) as b:
        out = preservation_suite(seed=1, instances=200, d=2, max_side=6, tol=1e-12)
    ok = out["passed"] and out["instances"] == 200 and out["worst_margin"] <= 1e-12 and b.ok
    verdict(1, "lattice preservation", ok,
            f"{out['instances'] - out['failures']}/200 pass, worst relative violation "
            f"{out['worst_margin']:.2e} (tol 1e-12), {b}")


def test_02_continuous_preservation(verdict):
    rng = np.random.default_rng(2)
    models = [random_smooth_lsm_model(rng) for _ in range(20)]
    passed, ratios = 0, []
    with Budget(300) as b:
        for m in models:
            margins = []
            for eps in (0.1, 0.05):
                f = restrict_to_lattice(m, [-3, -3], [3, 3], eps)
                factors, _ = gaussian_kernel_grid(eps, 2)
                rep = preservation_check(f, None, tol=1e-7, separable=factors)
                passed += rep.passed
                h = rep.data["convolution"]
                ax = h.axis(0)
                inner = np.flatnonzero((ax >= -2 - 1e-9) & (ax <= 2 + 1e-9))
                sl = slice(inner[0], inner[-1])
                margins.append(log_minor_margin(h.values, (sl, sl)))
            ratios.append(margins[0] / margins[1])
    ok = passed == 40 and min(ratios) >= 2.0 and b.ok
    verdict(2, "continuous preservation", ok,
            f"{passed}/40 convolutions pass at tol 1e-7, margin ratio eps 0.1 -> 0.05 "
            f"in [{min(ratios):.2f}, {max(ratios):.2f}] (need >= 2), {b}")


def test_03_kernel_necessity(verdict):
    rng = np.random.default_rng(3)
    with Budget(120) as b:
        nonproduct = [kernel_condition_check(random_lsm_lattice((3, 3), rng, spread=0.5, margin=0.1))
                      for _ in range(100)]
        product = [kernel_condition_check(make_product_kernel(
            [LatticeFunction.from_values(random_log_concave_1d(rng)) for _ in range(2)])[0])
            for _ in range(100)]
    fails = sum(not r.passed for r in nonproduct)
    passes = sum(r.passed for r in product)
    ok = fails >= 95 and passes == 100 and b.ok
    verdict(3, "kernel necessity", ok,
            f"non-product kernels failing {fails}/100 (need >= 95), product kernels passing "
            f"{passes}/100, {b}")


def test_04_ahlswede_daykin(verdict):
    with Budget(60) as b:
        out = fourfn_ad_suite(seed=4, instances=200, max_side=5, tol=1e-12)
    rows = out["results"]
    degenerate = [r for r in rows if r["tag"] == "fkg_degenerate"]
    hyp = all(r["hypothesis_passed"] for r in rows)
    exact = all(r["equality"] for r in degenerate)
    ok = out["passed"] and hyp and exact and len(degenerate) > 0 and b.ok
    verdict(4, "Ahlswede-Daykin", ok,
            f"{out['instances'] - out['failures']}/200 conclusions hold, "
            f"{sum(r['equality'] for r in degenerate)}/{len(degenerate)} degenerate cases exactly equal, {b}")


def test_05_eps_limit(verdict):
    mu = Gaussian.bivariate(0.5)
    phi = lambda z: 1.5 + np.tanh(z[..., 0] + z[..., 1])
    psi = lambda z: 1.2 + 1 / (1 + np.exp(-z[..., 0])) + 0.5 / (1 + np.exp(-2 * z[..., 1]))
    models = [FunctionModel(lambda z: mu(z) * phi(z), 2), FunctionModel(lambda z: mu(z) * psi(z), 2),
              mu, FunctionModel(lambda z: mu(z) * phi(z) * psi(z), 2)]
    with Budget(120) as b:
        rows = check_ad_continuous_limit(models, [-6, -6], [6, 6], [0.2, 0.1, 0.05],
                                         max_pairs=2_000_000, seed=5)
    gaps = [r["gap"] for r in rows]
    stable = all(g < 0 for g in gaps)
    change = abs(gaps[2] - gaps[1]) / abs(gaps[2])
    hyp = all(r["hypothesis_passed"] for r in rows)
    ok = stable and change < 0.10 and hyp and b.ok
    verdict(5, "eps-limit", ok,
            "gaps " + ", ".join(f"{g:.6g}" for g in gaps)
            + f" at eps 0.2/0.1/0.05, last halving changes the gap by {change:.2e} (need < 0.1), {b}")


def _ordered_pairs(n):
    x = np.linspace(-10, 10, 4001)
    out = []
    for k in range(n):
        shift = 0.1 + 0.2 * k
        if k % 2:
            out.append((Density1D(x, np.exp(-0.5 * x * x)), Density1D(x, np.exp(-0.5 * (x - shift) ** 2))))
        else:
            logistic = lambda t: -t - 2 * np.logaddexp(0.0, -t)
            out.append((Density1D(x, np.exp(logistic(x))), Density1D(x, np.exp(logistic(x - shift)))))
    return out


def test_06_displacement_convexity(verdict):
    with Budget(120) as b:
        out = transport_suite(seed=6, instances=500, tol=1e-6)
        ordered = [displacement_convexity_check(a, c) for a, c in _ordered_pairs(20)]
    rows = out["results"]
    worst = max(r["margin"] for r in rows)
    ident = max(abs(r["mass_identity"] - 1) for r in rows)
    identical = max(abs(r["margin"]) for r in rows if r["identical"])
    ordered_worst = max(abs(r.worst_violation) for r in ordered)
    ok = (out["passed"] and worst <= 1e-6 and ident <= 1e-6 and identical <= 1e-8
          and ordered_worst <= 1e-8 and b.ok)
    verdict(6, "displacement convexity", ok,
            f"{out['instances'] - out['failures']}/500 pairs, worst excess {worst:.2e} (tol 1e-6), "
            f"mass identity error {ident:.1e}, equality cases |violation| identical {identical:.1e} "
            f"/ ordered {ordered_worst:.1e} (tol 1e-8), {b}")


def test_07_derivative_bound(verdict):
    rng = np.random.default_rng(7)
    pairs = [(random_density(rng, 1.0, 17.0), random_density(rng, 1.0, 17.0)) for _ in range(50)]
    worst, checks, failed = -np.inf, 0, 0
    with Budget(60) as b:
        for nu1, nu2 in pairs:
            for alpha in (0.25, 0.5, 0.75, 1.0):
                for s in (0.2, 0.5, 0.8):
                    rep = derivative_bound_check(nu1, nu2, alpha, s, tol=1e-8)
                    worst = max(worst, rep.worst_violation)
                    checks += 1
                    failed += not rep.passed
    ok = failed == 0 and worst <= 1e-8 and b.ok
    verdict(7, "derivative bound", ok,
            f"{checks - failed}/{checks} (pair, alpha, s) checks, worst defect {worst:.2e} (tol 1e-8), {b}")


def test_08_general_prekopa_leindler(verdict):
    with Budget(120) as b:
        out = fourfn_general_suite(seed=8, instances=100, samples=20_000, tol=1e-8)
    tags = {r["tag"].replace("_equal", "") for r in out["results"]}
    hyp = all(r["hypothesis_passed"] for r in out["results"])
    ok = out["passed"] and hyp and {"r_half_s_one_minus_t", "near_three_function"} <= tags and b.ok
    verdict(8, "generalized Prekopa-Leindler", ok,
            f"{out['instances'] - out['failures']}/100 hold, worst relative gap {out['worst_margin']:.2e} "
            f"(tol 1e-8), families {sorted(tags)}, {b}")


def test_09_gaussian_S_oracle(verdict):
    params = FlowParams(0.5, 8.0, 64)
    rows = []
    with Budget(180) as b:
        for rho in (0.0, 0.25, 0.5, 0.75):
            model = Gaussian.bivariate(rho)
            S = compute_S(JointDensity2D.from_model(model, eps=0.05), params).S
            rows.append((rho, S, gaussian_S_oracle(model.cov, 0.5)))
    rel = [abs(S - o) / abs(o) for rho, S, o in rows if rho > 0]
    ok = (max(rel) <= 1e-3 and abs(rows[0][1]) <= 1e-5 and all(S < 0 for rho, S, _ in rows if rho > 0)
          and b.ok)
    verdict(9, "Gaussian S oracle", ok,
            ", ".join(f"rho {rho}: S {S:.8f} vs {o:.8f}" for rho, S, o in rows)
            + f"; worst relative error {max(rel):.1e} (tol 1e-3), |S(0)| {abs(rows[0][1]):.1e}, {b}")


def test_10_conditional_epi(verdict):
    params = FlowParams(0.5, 8.0, 32)
    with Budget(120) as b:
        rep = conditional_epi_check(JointDensity2D.from_model(Gaussian.bivariate(0.5), eps=0.05), params)
        ind = conditional_epi_check(JointDensity2D.from_model(Gaussian.standard(2), eps=0.05), params)
    ep, ei = rep.details["entropy_power"], ind.details["entropy_power"]
    e_sum = abs(ep["sum"] / (TWO_PI_E * 3) - 1)
    e_cond = abs(ep["conditional_sum"] / (TWO_PI_E * 1.5) - 1)
    e_ind = abs(ei["sum"] / (ei["x"] + ei["y"]) - 1)
    ok = rep.passed and e_sum <= 5e-3 and e_cond <= 5e-3 and e_ind <= 5e-3 and b.ok
    verdict(10, "conditional EPI", ok,
            f"N(X+Y) {ep['sum']:.4f} (rel err {e_sum:.1e}), N(X|Y)+N(Y|X) {ep['conditional_sum']:.4f} "
            f"(rel err {e_cond:.1e}), inequality {'holds' if rep.passed else 'fails'}; independent "
            f"N(X+Y)/(N(X)+N(Y)) - 1 = {e_ind:.1e} (tol 5e-3), {b}")


def test_11_cross_term_routes(verdict):
    rng = np.random.default_rng(11)
    dens = {f"gaussian rho={r}": JointDensity2D.from_model(Gaussian.bivariate(r), eps=0.05)
            for r in (0.0, 0.25, 0.5, 0.75, -0.5)}
    for k in range(5):
        dens[f"smooth LSM #{k}"] = JointDensity2D.from_model(random_smooth_lsm_model(rng), eps=0.05)
    dens["smooth LSM #0 flowed s=0.5"] = ou_flow(dens["smooth LSM #0"], 0.5, 0.5)
    with Budget(60) as b:
        terms = {name: fisher_cross_term(p) for name, p in dens.items()}
    worst_name = max(terms, key=lambda n: terms[n].relative_gap)
    worst = terms[worst_name].relative_gap
    half = terms["gaussian rho=0.5"]
    err = max(abs(half.route_a + 2 / 3), abs(half.route_b + 2 / 3)) / (2 / 3)
    ok = worst <= 1e-4 and err <= 1e-3 and b.ok
    verdict(11, "cross-term routes", ok,
            f"{len(terms)} densities, worst route gap {worst:.1e} ({worst_name}, tol 1e-4); "
            f"rho=0.5 gives {half.route_a:.8f} / {half.route_b:.8f} vs -2/3 (rel err {err:.1e}), {b}")


def test_12_criteria_equivalence(verdict):
    rng = np.random.default_rng(12)
    agree, lsm_count = 0, 0
    with Budget(60) as b:
        for k in range(100):
            d = 2 + k % 2
            shape = tuple(int(rng.integers(2, 6)) for _ in range(d))
            # half are LSM by construction, half are arbitrary positive grids
            v = (random_lsm_lattice(shape, rng).values if k % 4 < 2
                 else np.exp(rng.normal(scale=0.5, size=shape)))
            f = LatticeFunction.from_values(v)
            brute, local = is_log_supermodular(f).passed, topkis_local_check(f).passed
            agree += brute == local
            lsm_count += brute
    ok = agree == 100 and 0 < lsm_count < 100 and b.ok
    verdict(12, "brute vs local criterion", ok,
            f"agree on {agree}/100 grids ({lsm_count} LSM, {100 - lsm_count} not), {b}")
