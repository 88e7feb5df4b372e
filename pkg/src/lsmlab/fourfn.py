"""Four-function inequalities: hypothesis and conclusion checkers.

Each checker returns a ``(hypothesis, conclusion)`` pair of reports. The
hypothesis is a pointwise inequality audited over pairs of points, the
conclusion compares integrals. A failed hypothesis never makes the conclusion
report fail by itself; callers decide what to assert.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.stats import qmc

from .lattice import LatticeFunction, integral, restrict_to_lattice
from .lsm import CheckReport


class DegenerateMeanWarning(RuntimeWarning):
    """A mean with ``alpha <= 0`` met a zero argument and was set to its limit 0."""


@dataclass(frozen=True)
class MeanSpec:
    alpha: float
    lam: float

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must lie in [0, 1], got {self.lam}")


def generalized_mean(spec: MeanSpec, x, y):
    """``(lam x^a + (1-lam) y^a)^(1/a)`` with the min / geometric / max limits at ``a = -inf, 0, +inf``.

    Works componentwise on arrays.
    """
    a, lam = float(spec.alpha), float(spec.lam)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < 0) or np.any(y < 0):
        raise ValueError("generalized means need nonnegative arguments")
    if a == np.inf:
        return np.maximum(x, y)
    if a == -np.inf:
        return np.minimum(x, y)
    if lam == 1.0:
        return x + 0.0 * y
    if lam == 0.0:
        return y + 0.0 * x
    zero = (x == 0) | (y == 0)
    if a <= 0 and np.any(zero):
        warnings.warn("mean with alpha <= 0 at a zero argument; using the limit 0",
                      DegenerateMeanWarning, stacklevel=2)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if a == 0:
            out = x ** lam * y ** (1 - lam)
        elif abs(a) < 1e-8:
            # second order in a around the geometric mean
            d = np.log(x) - np.log(y)
            out = x ** lam * y ** (1 - lam) * np.exp(0.5 * a * lam * (1 - lam) * d * d)
        else:
            # factor out the argument that keeps both powers <= 1
            ref = np.maximum(x, y) if a > 0 else np.minimum(x, y)
            safe = np.where(ref > 0, ref, 1.0)
            # expm1/log1p keep small |a| accurate (the sum rounds to 1 otherwise)
            lx, ly = np.log(x / safe), np.log(y / safe)
            excess = lam * np.expm1(a * lx) + (1 - lam) * np.expm1(a * ly)
            out = np.where(ref > 0, ref * np.exp(np.log1p(excess) / a), 0.0)
    if a < 1e-8:
        out = np.where(zero, 0.0, out)
    return out


# ---------------------------------------------------------------- discrete


def _common_box(fs: Sequence[LatticeFunction]):
    d = fs[0].dim
    if any(f.dim != d for f in fs):
        raise ValueError("all four functions must share a dimension")
    lower = np.min([f.lower for f in fs], axis=0)
    upper = np.max([f.upper for f in fs], axis=0)
    shape = tuple(int(u - l + 1) for l, u in zip(lower, upper))
    out = []
    for f in fs:
        v = np.zeros(shape)
        off = tuple(slice(a - l, a - l + n) for a, l, n in zip(f.lower, lower, f.shape))
        v[off] = f.values
        out.append(v)
    return tuple(int(l) for l in lower), out


def _pair_index_blocks(shape, max_pairs: Optional[int], seed: int, chunk: int = 4_000_000):
    """Yield blocks ``(ix, iy)`` of flat indices covering all ordered pairs, or a seeded sample."""
    n = int(np.prod(shape))
    if max_pairs is None or n * n <= max_pairs:
        rows = max(1, chunk // n)
        for start in range(0, n, rows):
            ix = np.arange(start, min(n, start + rows))
            yield np.repeat(ix, n), np.tile(np.arange(n), len(ix))
    else:
        rng = np.random.default_rng(seed)
        left = max_pairs
        while left > 0:
            k = min(left, chunk)
            yield rng.integers(0, n, k), rng.integers(0, n, k)
            left -= k


def _ad_hypothesis_scan(vals, shape, max_pairs=None, seed=0):
    v1, v2, v3, v4 = (v.ravel() for v in vals)
    worst, wit, count = -np.inf, None, 0
    for ix, iy in _pair_index_blocks(shape, max_pairs, seed):
        px = np.stack(np.unravel_index(ix, shape), axis=-1)
        py = np.stack(np.unravel_index(iy, shape), axis=-1)
        lo = np.ravel_multi_index(tuple(np.minimum(px, py).T), shape)
        hi = np.ravel_multi_index(tuple(np.maximum(px, py).T), shape)
        diff = v1[ix] * v2[iy] - v3[lo] * v4[hi]
        k = int(np.argmax(diff))
        count += len(diff)
        if diff[k] > worst:
            worst, wit = float(diff[k]), (px[k], py[k])
    return worst, wit, count


def _conclusion(lhs: float, rhs: float, tol: float, check: str, **details) -> CheckReport:
    scale = max(abs(lhs), abs(rhs), np.finfo(float).tiny)
    gap = lhs - rhs
    return CheckReport(check=check, passed=gap <= tol * scale, worst_violation=gap,
                       tolerance=tol * scale,
                       details={"lhs": lhs, "rhs": rhs, "relative_gap": gap / scale, **details})


def check_ad_discrete(f1, f2, f3, f4, tol: float = 1e-12, max_pairs: Optional[int] = None,
                      seed: int = 0):
    """Ahlswede-Daykin on a box of ``Z^d``.

    Hypothesis: ``f1(x) f2(y) <= f3(x ^ y) f4(x v y)`` for all ordered pairs.
    Conclusion: ``sum f1 * sum f2 <= sum f3 * sum f4``. Above ``max_pairs``
    ordered pairs the hypothesis is audited on a seeded random sample.
    """
    fs = [f if isinstance(f, LatticeFunction) else LatticeFunction.from_values(f) for f in (f1, f2, f3, f4)]
    lower, vals = _common_box(fs)
    shape = vals[0].shape
    worst, wit, count = _ad_hypothesis_scan(vals, shape, max_pairs, seed)
    scale = max(vals[0].max() * vals[1].max(), vals[2].max() * vals[3].max(), np.finfo(float).tiny)
    sampled = max_pairs is not None and count < np.prod(shape) ** 2
    hyp = CheckReport(
        check="ad_hypothesis", passed=worst <= tol * scale, worst_violation=worst,
        tolerance=tol * scale, pairs_checked=count,
        witness=[] if wit is None else [(w + np.array(lower)).tolist() for w in wit],
        details={"scale": scale, "sampled": sampled, "seed": seed if sampled else None},
    )
    s = [float(np.sum(v)) for v in vals]
    concl = _conclusion(s[0] * s[1], s[2] * s[3], tol, "ad_conclusion", integrals=s)
    return hyp, concl


def check_ad_continuous_limit(models, lower, upper, eps_list, tol: float = 1e-12,
                              max_pairs: int = 2_000_000, seed: int = 0) -> list:
    """Restrict four models to ``eps Z^d`` inside the box and run the discrete theorem.

    Each table row holds the Lebesgue-normalized conclusion gap
    ``eps^{2d} (sum f1 sum f2 - sum f3 sum f4)``, which converges to the
    continuous gap as ``eps`` shrinks.
    """
    rows = []
    for eps in eps_list:
        grids = [restrict_to_lattice(m, lower, upper, eps) for m in models]
        hyp, concl = check_ad_discrete(*(g.values for g in grids), tol=tol,
                                       max_pairs=max_pairs, seed=seed)
        lhs = integral(grids[0]) * integral(grids[1])
        rhs = integral(grids[2]) * integral(grids[3])
        rows.append({
            "eps": float(eps), "points": int(grids[0].values.size),
            "lhs": lhs, "rhs": rhs, "gap": lhs - rhs,
            "hypothesis_passed": bool(hyp.passed), "hypothesis_worst": hyp.worst_violation,
            "conclusion_passed": bool(concl.passed),
        })
    return rows


# ---------------------------------------------------------------- continuous


def _evaluate(f, pts):
    return np.asarray(f(pts), dtype=float)


def low_discrepancy_pairs(lower, upper, n: int, seed: int = 0):
    """Deterministic scrambled Halton pairs ``(x, y)`` in the box ``[lower, upper]^2``."""
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    d = len(lower)
    u = qmc.Halton(d=2 * d, scramble=True, seed=seed).random(n)
    x = lower + (upper - lower) * u[:, :d]
    y = lower + (upper - lower) * u[:, d:]
    return x, y


def _integrals(fs, lower, upper, quad_points: int):
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    eps = float(np.max(upper - lower)) / (quad_points - 1)
    return [integral(restrict_to_lattice(f, lower, upper, eps)) for f in fs], eps


def _default_quad_points(d: int) -> int:
    return {1: 20001, 2: 801}.get(d, 101)


def _hypothesis_report(check, lhs, rhs, x, y, tol, n, seed):
    diff = lhs - rhs
    scale = max(float(np.max(lhs)), float(np.max(rhs)), np.finfo(float).tiny)
    k = int(np.argmax(diff))
    return CheckReport(
        check=check, passed=bool(diff[k] <= tol * scale), worst_violation=float(diff[k]),
        tolerance=tol * scale, witness=[x[k].tolist(), y[k].tolist()], pairs_checked=n,
        details={"scale": scale, "samples": n, "sequence": "halton-scrambled", "seed": seed},
    )


def check_cem(f1, f2, f3, f4, lam: float, lower, upper, tol: float = 1e-8, samples: int = 100_000,
              seed: int = 0, quad_points: Optional[int] = None):
    """Cordero-Erausquin-Maurey four-function inequality.

    Hypothesis: ``f1(x) f2(y) <= f3(lam x + (1-lam) y) f4((1-lam) x + lam y)``,
    sampled over ``samples`` low-discrepancy pairs in the box. Conclusion by
    grid quadrature over the box.
    """
    if not 0.0 < lam < 1.0:
        raise ValueError(f"lambda must lie strictly inside (0, 1), got {lam}")
    x, y = low_discrepancy_pairs(lower, upper, samples, seed)
    lhs = _evaluate(f1, x) * _evaluate(f2, y)
    rhs = _evaluate(f3, lam * x + (1 - lam) * y) * _evaluate(f4, (1 - lam) * x + lam * y)
    hyp = _hypothesis_report("cem_hypothesis", lhs, rhs, x, y, tol, samples, seed)
    d = x.shape[1]
    ints, eps = _integrals((f1, f2, f3, f4), lower, upper, quad_points or _default_quad_points(d))
    concl = _conclusion(ints[0] * ints[1], ints[2] * ints[3], tol, "cem_conclusion",
                        integrals=ints, quad_spacing=eps)
    return hyp, concl


PROVEN_PAIRS = {(1.0, 1.0), (-np.inf, np.inf)}


def unified_pair_is_proven(alpha: float, beta: float) -> bool:
    return (alpha, beta) in PROVEN_PAIRS or (0.0 <= alpha <= 1.0 and 0.0 <= beta <= 1.0)


def check_unified(f1, f2, f3, f4, alpha: float, beta: float, t: float, lower=None, upper=None,
                  tol: float = 1e-8, samples: int = 100_000, seed: int = 0,
                  quad_points: Optional[int] = None):
    """Joint Ahlswede-Daykin / Cordero-Erausquin-Maurey statement with power means.

    Hypothesis: ``f1(x) f2(y) <= f3(M_alpha^t(x, y)) f4(M_beta^{1-t}(x, y))``.
    Lattice inputs with ``(alpha, beta) = (-inf, inf)`` are handed to
    :func:`check_ad_discrete`. Pairs outside the proven set are run but marked
    exploratory in the report details.
    """
    if not 0.0 < t < 1.0:
        raise ValueError(f"t must lie strictly inside (0, 1), got {t}")
    proven = unified_pair_is_proven(alpha, beta)
    if all(isinstance(f, LatticeFunction) for f in (f1, f2, f3, f4)):
        if (alpha, beta) != (-np.inf, np.inf):
            raise ValueError("lattice inputs support only (alpha, beta) = (-inf, inf)")
        hyp, concl = check_ad_discrete(f1, f2, f3, f4, tol=tol)
        hyp.details["route"] = concl.details["route"] = "ad_discrete"
        return hyp, concl
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    if min(alpha, beta) <= 0 and np.any(lower <= 0):
        raise ValueError("support must stay inside (0, inf)^d when alpha or beta <= 0")
    if np.any(lower < 0):
        raise ValueError("power means are defined on (0, inf)^d")
    x, y = low_discrepancy_pairs(lower, upper, samples, seed)
    m3 = generalized_mean(MeanSpec(alpha, t), x, y)
    m4 = generalized_mean(MeanSpec(beta, 1 - t), x, y)
    lhs = _evaluate(f1, x) * _evaluate(f2, y)
    rhs = _evaluate(f3, m3) * _evaluate(f4, m4)
    hyp = _hypothesis_report("unified_hypothesis", lhs, rhs, x, y, tol, samples, seed)
    ints, eps = _integrals((f1, f2, f3, f4), lower, upper, quad_points or _default_quad_points(x.shape[1]))
    concl = _conclusion(ints[0] * ints[1], ints[2] * ints[3], tol, "unified_conclusion",
                        integrals=ints, quad_spacing=eps)
    for rep in (hyp, concl):
        rep.details.update({"alpha": alpha, "beta": beta, "t": t, "proven_pair": proven})
    return hyp, concl


@dataclass
class FourFnInstance:
    """Four functions with the exponents and means of the generalized statement.

    ``m`` defaults to ``s r + (1 - r) t``; an explicit ``m`` must match it.
    """

    f1: object
    f2: object
    f3: object
    f4: object
    lower: Sequence[float]
    upper: Sequence[float]
    r: float = 0.5
    s: float = 0.5
    t: float = 0.5
    alpha: float = 1.0
    beta: float = 1.0
    m: Optional[float] = None
    label: str = ""

    def __post_init__(self):
        implied = self.s * self.r + (1 - self.r) * self.t
        if self.m is None:
            self.m = implied
        elif abs(self.m - implied) > 1e-12:
            raise ValueError(f"m = {self.m} but s r + (1 - r) t = {implied}")

    @property
    def functions(self):
        return (self.f1, self.f2, self.f3, self.f4)


def check_general_pl(inst: FourFnInstance, tol: float = 1e-8, samples: int = 100_000, seed: int = 0,
                     quad_points: Optional[int] = None):
    """Generalized four-function Prekopa-Leindler inequality.

    Hypothesis: ``f1(x)^m f2(y)^{1-m} <= f3(M_alpha^s(x,y))^r f4(M_beta^t(x,y))^{1-r}``.
    Conclusion: ``(int f1)^m (int f2)^{1-m} <= (int f3)^r (int f4)^{1-r}``.
    """
    for name in ("r", "s", "t"):
        val = getattr(inst, name)
        if not 0.0 < val < 1.0:
            raise ValueError(f"{name} must lie strictly inside (0, 1), got {val}")
    if not (0.0 <= inst.alpha <= 1.0 and 0.0 <= inst.beta <= 1.0):
        raise ValueError("alpha and beta must lie in [0, 1]")
    lower = np.atleast_1d(np.asarray(inst.lower, dtype=float))
    upper = np.atleast_1d(np.asarray(inst.upper, dtype=float))
    if np.any(lower < 0) or (min(inst.alpha, inst.beta) == 0 and np.any(lower <= 0)):
        raise ValueError("supports must lie in (0, inf)^d")
    m, r = inst.m, inst.r
    x, y = low_discrepancy_pairs(lower, upper, samples, seed)
    m3 = generalized_mean(MeanSpec(inst.alpha, inst.s), x, y)
    m4 = generalized_mean(MeanSpec(inst.beta, inst.t), x, y)
    lhs = _evaluate(inst.f1, x) ** m * _evaluate(inst.f2, y) ** (1 - m)
    rhs = _evaluate(inst.f3, m3) ** r * _evaluate(inst.f4, m4) ** (1 - r)
    hyp = _hypothesis_report("general_pl_hypothesis", lhs, rhs, x, y, tol, samples, seed)
    ints, eps = _integrals(inst.functions, lower, upper,
                           quad_points or _default_quad_points(x.shape[1]))
    concl = _conclusion(ints[0] ** m * ints[1] ** (1 - m), ints[2] ** r * ints[3] ** (1 - r), tol,
                        "general_pl_conclusion", integrals=ints, quad_spacing=eps)
    params = {"m": m, "r": r, "s": inst.s, "t": inst.t, "alpha": inst.alpha, "beta": inst.beta,
              "label": inst.label}
    hyp.details.update(params)
    concl.details.update(params)
    return hyp, concl


# ---------------------------------------------------------------- generators


def fkg_lattice_instance(mu: np.ndarray, phi: np.ndarray, psi: np.ndarray):
    """``(mu phi, mu psi, mu, mu phi psi)``: AD hypothesis holds for LSM ``mu`` and
    positive coordinatewise-increasing ``phi``, ``psi``."""
    return mu * phi, mu * psi, mu, mu * phi * psi


def increasing_function(shape, rng) -> np.ndarray:
    """Positive function on a box that is nondecreasing along every axis."""
    v = rng.random(shape)
    for ax in range(len(shape)):
        v = np.cumsum(v, axis=ax)
    return v / v.max() + 0.1


def ad_instance(rng, k: int, max_side: int = 5):
    """The ``k``-th constructively hypothesis-true quadruple, as ``(tag, (f1, f2, f3, f4))``.

    ``k`` picks the dimension (1 or 2) and cycles through: all four equal
    (degenerate FKG), the FKG construction with increasing weights,
    ``f1, f2 <= mu = f3 = f4``, and ``f1, f2 <= 1 = f3 = f4``.
    """
    from .convolve import random_lsm_lattice

    d = 1 + (k % 2)
    shape = tuple(int(rng.integers(2, max_side + 1)) for _ in range(d))
    if d == 1:
        mu = np.exp(rng.normal(size=shape))
    else:
        mu = random_lsm_lattice(shape, rng).values
    kind = k % 4
    if kind == 0:
        quad = (mu, mu, mu, mu)
        tag = "fkg_degenerate"
    elif kind == 1:
        quad = fkg_lattice_instance(mu, increasing_function(shape, rng), increasing_function(shape, rng))
        tag = "fkg"
    elif kind == 2:
        quad = (mu * rng.uniform(0.2, 1.0, shape), mu * rng.uniform(0.2, 1.0, shape), mu, mu)
        tag = "dominated"
    else:
        quad = (rng.random(shape), rng.random(shape), np.ones(shape), np.ones(shape))
        tag = "bounded"
    return tag, tuple(LatticeFunction.from_values(q) for q in quad)


def ad_instances(rng, count: int, max_side: int = 5):
    return [ad_instance(rng, k, max_side) for k in range(count)]


MEAN_EXPONENTS = (0.0, 0.25, 0.5, 0.75, 1.0)


def general_pl_instance(rng, k: int) -> "FourFnInstance":
    """Hypothesis-true instances of the generalized inequality on ``(0, X]``.

    ``F(x) = x^q exp(-c x^p)`` with ``q >= 0``, ``c > 0``, ``p >= 1`` satisfies
    ``F(x)^m F(y)^{1-m} <= F(M_a^s)^r F(M_b^t)^{1-r}`` for all ``a, b`` in ``[0, 1]``.
    Shrinking ``f1, f2`` below ``F`` and scaling ``f3, f4`` by ``c3^r c4^{1-r} >= 1``
    keeps the hypothesis. ``k % 3`` selects ``r = 1/2, s = 1 - t``, ``r = 0.01``
    or generic weights; even ``k`` keeps all four functions equal to ``F``.
    """
    from .models import FunctionModel, PowerExp

    kind = k % 3
    if kind == 0:
        r, s = 0.5, float(rng.uniform(0.05, 0.95))
        t = 1.0 - s
        tag = "r_half_s_one_minus_t"
    elif kind == 1:
        r, s, t = 0.01, float(rng.uniform(0.05, 0.95)), float(rng.uniform(0.05, 0.95))
        tag = "near_three_function"
    else:
        r, s, t = (float(v) for v in rng.uniform(0.05, 0.95, 3))
        tag = "generic"
    alpha = float(rng.choice(MEAN_EXPONENTS))
    beta = float(rng.choice(MEAN_EXPONENTS))
    F = PowerExp(power=float(rng.uniform(0.0, 3.0)), rate=float(rng.uniform(0.5, 2.0)),
                 shape=float(rng.uniform(1.0, 2.0)))
    equal = k % 2 == 0
    if equal:
        f1 = f2 = f3 = f4 = F
    else:
        a1, a2 = rng.uniform(0.3, 1.0, 2)
        w1, w2 = rng.uniform(0.0, 2.0, 2)
        c3 = float(rng.uniform(1.0, 2.0))
        c4 = float(rng.uniform(c3 ** (-r / (1 - r)), 2.0))
        f1 = FunctionModel(lambda z, F=F, a=a1, w=w1: a * F(z) * np.exp(-w * np.sin(z[..., 0]) ** 2))
        f2 = FunctionModel(lambda z, F=F, a=a2, w=w2: a * F(z) / (1.0 + w * z[..., 0] ** 2))
        f3 = PowerExp(F.power, F.rate, F.shape, c3)
        f4 = PowerExp(F.power, F.rate, F.shape, c4)
    # a positive lower edge keeps geometric means away from 0
    return FourFnInstance(f1, f2, f3, f4, lower=(1e-6,), upper=(60.0,), r=r, s=s, t=t,
                          alpha=alpha, beta=beta, label=f"{tag}{'_equal' if equal else ''}")


def general_pl_instances(rng, count: int):
    return [general_pl_instance(rng, k) for k in range(count)]
