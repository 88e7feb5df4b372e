"""Seeded randomized property suites.

Each instance draws from its own child seed, so results do not depend on how
instances are scheduled across threads. Reports list instances in index order.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional

import numpy as np

from .convolve import (counterexample_search, make_product_kernel, preservation_check,
                       random_log_concave_1d, random_lsm_lattice)
from .epi import FlowParams, JointDensity2D, conditional_epi_check, gaussian_S_oracle
from .fourfn import ad_instance, check_ad_discrete, check_general_pl, general_pl_instance
from .lattice import LatticeFunction
from .models import Gaussian
from .transport import displacement_convexity_check, random_density

SUITES = ("preservation", "fourfn-ad", "fourfn-general", "transport", "epi", "counterexample")


def _threads(threads: Optional[int]) -> int:
    from .epi import _threads as env_threads
    return env_threads(threads)


def _run(fn: Callable, items, threads: Optional[int]):
    with ThreadPoolExecutor(max_workers=_threads(threads)) as pool:
        return list(pool.map(fn, items))


def _rngs(seed: int, n: int):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def _summary(name: str, seed: int, params: dict, rows: list, extra: Optional[dict] = None) -> dict:
    failures = [r["index"] for r in rows if not r["passed"]]
    margins = [r["margin"] for r in rows if r.get("margin") is not None and np.isfinite(r["margin"])]
    out = {
        "suite": name, "seed": seed, "params": params,
        "passed": not failures, "instances": len(rows), "failures": len(failures),
        "failed_indices": failures,
        "worst_margin": max(margins) if margins else None,
        "results": rows,
    }
    if extra:
        out.update(extra)
    return out


def preservation_suite(seed: int = 0, instances: int = 200, d: int = 2, max_side: int = 6,
                       tol: float = 1e-12, threads: Optional[int] = None) -> dict:
    """Random LSM lattice functions convolved with random log-concave product kernels.

    ``margin`` is the relative violation of the convolution (at most ``tol`` to pass).
    """
    def one(arg):
        k, rng = arg
        shape = tuple(int(rng.integers(2, max_side + 1)) for _ in range(d))
        f = random_lsm_lattice(shape, rng)
        g, _ = make_product_kernel([LatticeFunction.from_values(random_log_concave_1d(rng))
                                    for _ in range(d)])
        rep = preservation_check(f, g, tol=tol, method="brute")
        concl = rep.details.get("conclusion")
        rel = concl.details["relative_violation"] if concl is not None else float("inf")
        return {"index": k, "shape": list(shape), "kernel_shape": list(g.shape),
                "passed": rep.passed, "status": rep.status, "margin": rel}

    rows = _run(one, list(enumerate(_rngs(seed, instances))), threads)
    return _summary("preservation", seed, {"instances": instances, "d": d, "max_side": max_side,
                                           "tol": tol}, rows)


def fourfn_ad_suite(seed: int = 0, instances: int = 200, max_side: int = 5, tol: float = 1e-12,
                    threads: Optional[int] = None) -> dict:
    """Constructively hypothesis-true quadruples; ``margin`` is the relative conclusion gap
    ``(f1 f2 - f3 f4) / (f3 f4)`` in integrals."""
    def one(arg):
        k, rng = arg
        tag, quad = ad_instance(rng, k, max_side)
        hyp, concl = check_ad_discrete(*quad, tol=tol)
        lhs, rhs = concl.details["lhs"], concl.details["rhs"]
        return {"index": k, "tag": tag, "shape": list(quad[0].shape),
                "passed": hyp.passed and concl.passed, "hypothesis_passed": hyp.passed,
                "margin": (lhs - rhs) / rhs, "equality": lhs == rhs}

    rows = _run(one, list(enumerate(_rngs(seed, instances))), threads)
    return _summary("fourfn-ad", seed, {"instances": instances, "max_side": max_side, "tol": tol}, rows)


def fourfn_general_suite(seed: int = 0, instances: int = 100, samples: int = 20_000, tol: float = 1e-8,
                         threads: Optional[int] = None) -> dict:
    """Generalized Prekopa-Leindler instances; ``margin`` is ``lhs - rhs`` over ``rhs``."""
    def one(arg):
        k, rng = arg
        inst = general_pl_instance(rng, k)
        hyp, concl = check_general_pl(inst, tol=tol, samples=samples, seed=k)
        lhs, rhs = concl.details["lhs"], concl.details["rhs"]
        return {"index": k, "tag": inst.label, "r": inst.r, "s": inst.s, "t": inst.t,
                "alpha": inst.alpha, "beta": inst.beta,
                "passed": hyp.passed and concl.passed, "hypothesis_passed": hyp.passed,
                "margin": (lhs - rhs) / rhs}

    rows = _run(one, list(enumerate(_rngs(seed, instances))), threads)
    return _summary("fourfn-general", seed, {"instances": instances, "samples": samples, "tol": tol}, rows)


def transport_suite(seed: int = 0, instances: int = 500, tol: float = 1e-6, n: int = 2001,
                    threads: Optional[int] = None) -> dict:
    """Random density pairs; entropy of the min/max pushforwards against the originals.

    ``margin`` is ``H(nu_-) + H(nu_+) - H(nu1) - H(nu2)``.
    """
    def one(arg):
        k, rng = arg
        nu1 = random_density(rng, n=n)
        nu2 = nu1 if k % 10 == 0 else random_density(rng, n=n)
        rep = displacement_convexity_check(nu1, nu2, tol)
        ident = rep.details["mass_identity"]
        ok = rep.passed and abs(ident - 1.0) <= tol
        return {"index": k, "passed": ok, "margin": rep.worst_violation, "mass_identity": ident,
                "crossings": len(rep.details["crossings"]), "identical": k % 10 == 0}

    rows = _run(one, list(enumerate(_rngs(seed, instances))), threads)
    return _summary("transport", seed, {"instances": instances, "tol": tol, "nodes": n}, rows)


def epi_suite(seed: int = 0, gaussian_rhos=(0.0, 0.25, 0.5), lam: float = 0.5, eps: float = 0.05,
              s_max: float = 8.0, n_nodes: int = 64, tol: float = 1e-5,
              threads: Optional[int] = None) -> dict:
    """Bivariate Gaussians with nonnegative correlation: ``S <= tol``, the bare conditional
    inequality holds, and ``S`` matches the exact covariance-flow value."""
    params = FlowParams(lam, s_max, n_nodes)

    def one(arg):
        k, rho = arg
        model = Gaussian.bivariate(float(rho))
        p = JointDensity2D.from_model(model, eps=eps)
        rep = conditional_epi_check(p, params, tol=1e-6, mode="corollary")
        S = rep.details["S"]
        oracle = gaussian_S_oracle(model.cov, lam)
        rel = abs(S - oracle) / abs(oracle) if oracle != 0 else abs(S)
        return {"index": k, "rho": float(rho), "S": S, "S_oracle": oracle, "S_relative_error": rel,
                "mode": rep.details["mode"], "epi_passed": rep.passed,
                "passed": bool(rep.passed and S <= tol), "margin": S}

    rows = _run(one, list(enumerate(gaussian_rhos)), threads)
    return _summary("epi", seed, {"gaussian_rhos": [float(r) for r in gaussian_rhos], "lambda": lam,
                                  "eps": eps, "s_max": s_max, "nodes": n_nodes, "tol": tol}, rows)


def counterexample_suite(seed: int = 0, trials: int = 1000, size: int = 3, tol: float = 1e-12,
                         threads: Optional[int] = None) -> dict:
    """Passes when no log-concave product kernel breaks preservation; the search with
    general LSM kernels is run alongside and its witness reported as evidence."""
    product = counterexample_search(seed, trials, size, product_kernel=True, tol=tol)
    general = counterexample_search(seed, trials, size, product_kernel=False, tol=tol)
    rows = [{"index": 0, "kernels": "log_concave_product", "found": product is not None,
             "passed": product is None, "margin": None}]
    evidence = None
    if general is not None:
        f, g, rep = general
        evidence = {"f": f.values, "g": g.values, "report": rep}
    return _summary("counterexample", seed, {"trials": trials, "size": size, "tol": tol}, rows,
                    {"general_kernel_witness": evidence})


def run_suite(name: str, seed: int = 0, **params) -> dict:
    runners = {
        "preservation": preservation_suite,
        "fourfn-ad": fourfn_ad_suite,
        "fourfn-general": fourfn_general_suite,
        "transport": transport_suite,
        "epi": epi_suite,
        "counterexample": counterexample_suite,
    }
    if name not in runners:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return runners[name](seed=seed, **params)
