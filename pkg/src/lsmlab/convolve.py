"""Convolution on ``Z^d`` and on grids, with the experiments on what it preserves."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import signal
from scipy.special import ndtr

from .lattice import GridFunction, LatticeFunction, integral
from .lsm import (CheckReport, is_log_concave_1d, is_log_supermodular, mixed_differences,
                  pair_scan, topkis_local_check)
from .models import DensityModel, Product, log_concavity_audit

# brute-force pair budget before preservation_check falls back to the local criterion
BRUTE_PAIR_LIMIT = 20_000_000


def convolve_lattice(f: LatticeFunction, g: LatticeFunction) -> LatticeFunction:
    """Exact ``(f*g)(x) = sum_z f(x - z) g(z)``; the box is the Minkowski sum."""
    if f.dim != g.dim:
        raise ValueError(f"dimension mismatch: {f.dim} vs {g.dim}")
    values = signal.convolve(f.values, g.values, mode="full", method="direct")
    lower = tuple(a + b for a, b in zip(f.lower, g.lower))
    return LatticeFunction(lower, np.maximum(values, 0.0))


def convolve_grid(f: GridFunction, g: GridFunction, method: str = "auto") -> GridFunction:
    """``(f*g)(x) ~ eps^d sum_z f(x - z) g(z)`` on the Minkowski-sum grid.

    ``method`` is ``direct``, ``fft`` or ``auto`` (direct below ~1e8 multiply-adds).
    """
    if f.dim != g.dim:
        raise ValueError(f"dimension mismatch: {f.dim} vs {g.dim}")
    if not np.isclose(f.spacing, g.spacing, rtol=1e-12, atol=0.0):
        raise ValueError(f"spacing mismatch: {f.spacing} vs {g.spacing}")
    if method == "auto":
        method = "direct" if f.values.size * g.values.size <= 1e8 else "fft"
    if method not in ("direct", "fft"):
        raise ValueError(f"unknown method {method!r}")
    values = signal.convolve(f.values, g.values, mode="full", method=method)
    values = np.maximum(values, 0.0) * f.spacing ** f.dim
    origin = tuple(a + b for a, b in zip(f.origin, g.origin))
    return GridFunction(origin, f.spacing, values)


def convolve_grid_separable(f: GridFunction, factors: Sequence[GridFunction]) -> GridFunction:
    """Convolve with a product kernel ``g(z) = prod_i g_i(z_i)`` one axis at a time.

    Gives the same result as :func:`convolve_grid` with the outer-product kernel,
    at a fraction of the cost.
    """
    if len(factors) != f.dim:
        raise ValueError("need one factor per axis")
    values = f.values
    origin = list(f.origin)
    for axis, fac in enumerate(factors):
        if fac.dim != 1 or not np.isclose(fac.spacing, f.spacing, rtol=1e-12, atol=0.0):
            raise ValueError("factors must be 1-D grids with the same spacing")
        kernel = fac.values.reshape([-1 if k == axis else 1 for k in range(f.dim)])
        values = signal.convolve(values, kernel, mode="full", method="direct") * f.spacing
        origin[axis] += fac.origin[0]
    return GridFunction(tuple(origin), f.spacing, np.maximum(values, 0.0))


@dataclass(frozen=True)
class TruncatedKernel:
    """A 1-D kernel on a grid plus the mass lost to truncation."""

    grid: GridFunction
    truncated_mass: float


def gaussian_kernel_1d(eps: float, sigma: float = 1.0, tail: float = 1e-10) -> TruncatedKernel:
    """Discretized ``N(0, sigma^2)`` density on ``eps Z``, cut where the outside mass < ``tail``."""
    k = 0
    while 2.0 * ndtr(-(k * eps) / sigma) >= tail:
        k += 1
    x = eps * np.arange(-k, k + 1)
    vals = np.exp(-0.5 * (x / sigma) ** 2) / (sigma * np.sqrt(2 * np.pi))
    return TruncatedKernel(GridFunction((-k * eps,), eps, vals), float(2.0 * ndtr(-(k * eps) / sigma)))


def gaussian_kernel_grid(eps: float, dim: int, sigma: float = 1.0, tail: float = 1e-10):
    """Standard Gaussian on ``eps Z^d`` as its 1-D factors; tail budget split over axes."""
    fac = gaussian_kernel_1d(eps, sigma, tail / dim)
    return [fac.grid] * dim, dim * fac.truncated_mass


def outer_product(factors: Sequence[np.ndarray]) -> np.ndarray:
    out = np.asarray(factors[0], dtype=float)
    for fac in factors[1:]:
        out = np.multiply.outer(out, np.asarray(fac, dtype=float))
    return out


def make_product_kernel(factors: Sequence, tol: float = 1e-9, audit_box: float = 10.0):
    """Build ``g(z) = prod_i g_i(z_i)`` from 1-D lattice functions or 1-D models.

    Returns ``(kernel, flags)`` where ``flags[i]`` says whether factor ``i`` is
    log-concave (discrete criterion for lattices, second differences of the log
    over ``[-audit_box, audit_box]`` for models).
    """
    factors = list(factors)
    if not factors:
        raise ValueError("need at least one factor")
    if all(isinstance(f, LatticeFunction) for f in factors):
        for fac in factors:
            if fac.dim != 1:
                raise ValueError("factors must be one-dimensional")
        flags = [is_log_concave_1d(fac, tol).passed for fac in factors]
        lower = tuple(fac.lower[0] for fac in factors)
        return LatticeFunction(lower, outer_product([fac.values for fac in factors])), flags
    if all(isinstance(f, DensityModel) for f in factors):
        flags = [log_concavity_audit(fac, -audit_box, audit_box, tol=tol)[0] for fac in factors]
        return Product(tuple(factors)), flags
    raise TypeError("factors must be all LatticeFunction or all DensityModel")


def binomial_weights(n: int, p: float = 0.5) -> np.ndarray:
    from scipy.stats import binom
    return binom.pmf(np.arange(n + 1), n, p)


def geometric_weights(q: float, length: int) -> np.ndarray:
    return (1 - q) * q ** np.arange(length)


def _lsm_report(h, tol: float, method: str) -> CheckReport:
    if method == "auto":
        n = h.values.size
        method = "brute" if n * n / 2 <= BRUTE_PAIR_LIMIT or np.any(h.values == 0) else "topkis"
    if method == "brute":
        return is_log_supermodular(h, tol)
    return topkis_local_check(h, tol)


def preservation_check(f, g, tol: float = 1e-9, method: str = "auto",
                       separable: Optional[Sequence[GridFunction]] = None) -> CheckReport:
    """Audit that ``f`` is log-supermodular, convolve with ``g``, audit ``f*g``.

    ``g`` may be a lattice/grid function, or pass ``separable`` (1-D grid factors)
    to convolve with a product kernel axis by axis. ``method`` picks the LSM
    criterion for the conclusion: ``brute``, ``topkis`` or ``auto`` (brute force
    unless the pair count exceeds the budget; the local criterion is equivalent
    on strictly positive boxes). A premise failure is reported, not raised.
    """
    premise = _lsm_report(f, tol, method)
    if not premise.passed:
        return CheckReport(
            check="preservation", passed=False, worst_violation=premise.worst_violation,
            tolerance=premise.tolerance, witness=premise.witness, status="precondition_failed",
            details={"premise": premise, "conclusion": None},
        )
    if isinstance(f, LatticeFunction):
        h = convolve_lattice(f, g)
    elif separable is not None:
        h = convolve_grid_separable(f, separable)
    else:
        h = convolve_grid(f, g)
    conclusion = _lsm_report(h, tol, method)
    return CheckReport(
        check="preservation", passed=conclusion.passed,
        worst_violation=conclusion.worst_violation, tolerance=conclusion.tolerance,
        witness=conclusion.witness, pairs_checked=conclusion.pairs_checked,
        details={"premise": premise, "conclusion": conclusion,
                 "conclusion_method": conclusion.check, "mass": integral(h)},
        data={"convolution": h},
    )


def doubled_lattice(g: np.ndarray, tail: int = 1) -> np.ndarray:
    """``u(x, y) = g(x - y)`` on a box of the doubled lattice ``Z^{2d}``.

    ``x`` and ``y`` each take ``n_i + tail`` values per axis, so ``x - y`` sweeps
    the support of ``g`` plus at least ``tail`` zeros on each side.
    """
    g = np.asarray(g, dtype=float)
    d = g.ndim
    ranges = [np.arange(n + tail) for n in g.shape]
    grids = np.meshgrid(*(ranges + ranges), indexing="ij")
    inside = np.ones(grids[0].shape, dtype=bool)
    idx = []
    for i, n in enumerate(g.shape):
        k = grids[i] - grids[d + i] + (n - 1) // 2
        inside &= (k >= 0) & (k < n)
        idx.append(np.clip(k, 0, n - 1))
    return np.where(inside, g[tuple(idx)], 0.0)


def kernel_condition_check(g, tol: float = 1e-9, max_quadruples: int = 1_000_000,
                           seed: int = 0, tail: int = 1) -> CheckReport:
    """Check ``g(x-u) g(y-w) <= g(x^y - u^w) g(xvy - uvw)``.

    This is log-supermodularity of ``u(x, y) = g(x - y)`` on the doubled lattice.
    The doubled box is scanned exhaustively when it has at most
    ``max_quadruples`` incomparable pairs, otherwise pairs are drawn with a
    seeded generator.
    """
    v = g.values if isinstance(g, (LatticeFunction, GridFunction)) else np.asarray(g, dtype=float)
    u = doubled_lattice(v, tail)
    scale = float(np.max(v)) ** 2 or 1.0
    thresh = tol * scale
    d = v.ndim
    n_pts = u.size
    if n_pts * n_pts / 2 <= max_quadruples:
        worst, wit, pairs = pair_scan(u)
        sampled = False
    else:
        rng = np.random.default_rng(seed)
        a = rng.integers(0, u.shape, size=(max_quadruples, u.ndim))
        b = rng.integers(0, u.shape, size=(max_quadruples, u.ndim))
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        diff = u[tuple(a.T)] * u[tuple(b.T)] - u[tuple(lo.T)] * u[tuple(hi.T)]
        k = int(np.argmax(diff))
        worst, wit, pairs = float(diff[k]), (a[k], b[k]), max_quadruples
        sampled = True
    witness = []
    if wit is not None:
        # unpack doubled-lattice points into (x, u) and (y, w) in g's index frame
        x_pt, y_pt = np.asarray(wit[0]), np.asarray(wit[1])
        witness = [x_pt[:d].tolist(), y_pt[:d].tolist(), x_pt[d:].tolist(), y_pt[d:].tolist()]
    return CheckReport(
        check="kernel_condition", passed=worst <= thresh, worst_violation=worst, tolerance=thresh,
        witness=witness, pairs_checked=pairs,
        details={"sampled": sampled, "seed": seed if sampled else None, "scale": scale,
                 "witness_order": "x, y, u, w", "rel_tol": tol},
    )


def random_supermodular_potential(shape, rng, spread: float = 2.0, margin: float = 0.0) -> np.ndarray:
    """Random ``V`` on a box, tilted by ``c * x_i * x_j`` until every mixed
    second difference is at least ``margin``."""
    V = rng.normal(scale=spread, size=shape)
    idx = np.meshgrid(*(np.arange(n) for n in shape), indexing="ij")
    for i, j, mixed in mixed_differences(V):
        if mixed.size and mixed.min() < margin:
            # the tilt adds exactly c to every (i, j) mixed difference
            V = V + (margin - mixed.min()) * idx[i] * idx[j]
    return V


def random_lsm_lattice(shape, rng, spread: float = 2.0, margin: float = 0.0) -> LatticeFunction:
    V = random_supermodular_potential(shape, rng, spread, margin)
    return LatticeFunction((0,) * len(shape), np.exp(V - V.max()))


def random_log_concave_1d(rng, max_len: int = 5) -> np.ndarray:
    """Binomial or truncated geometric weights with random parameters."""
    if rng.random() < 0.5:
        n = int(rng.integers(1, max_len))
        return binomial_weights(n, float(rng.uniform(0.2, 0.8)))
    return geometric_weights(float(rng.uniform(0.1, 0.9)), int(rng.integers(1, max_len + 1)))


def counterexample_search(seed: int, trials: int, size: int = 3, product_kernel: bool = False,
                          tol: float = 1e-12):
    """Search random LSM pairs ``(f, g)`` on ``Z^2`` for a non-LSM convolution.

    Returns ``(f, g, report)`` for the first failing pair, or ``None``. With
    ``product_kernel`` the kernel is a random log-concave product instead, in
    which case no counterexample can exist.
    """
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        f = random_lsm_lattice((size, size), rng)
        if product_kernel:
            g, _ = make_product_kernel([LatticeFunction.from_values(random_log_concave_1d(rng))
                                        for _ in range(2)])
        else:
            g = random_lsm_lattice((size, size), rng)
        h = convolve_lattice(f, g)
        rep = is_log_supermodular(h, tol)
        if not rep.passed:
            return f, g, rep
    return None


def random_smooth_lsm_model(rng, dim: int = 2):
    """Random smooth log-supermodular density model on ``R^dim``.

    The potential adds separable confining terms, ``c x_i x_j``,
    ``k tanh(w x_i) tanh(w' x_j)`` and ``softplus(sum x + b)``; each of these has
    nonnegative mixed partials, so ``exp(potential)`` is log-supermodular.
    """
    from .models import FunctionModel

    quad = rng.uniform(0.6, 1.5, dim)
    quart = rng.uniform(0.0, 0.1, dim)
    lin = rng.uniform(-0.5, 0.5, dim)
    pairs = [(i, j, rng.uniform(0.05, 0.4), rng.uniform(0.0, 0.5), rng.uniform(0.5, 2.0),
              rng.uniform(0.5, 2.0)) for i in range(dim) for j in range(i + 1, dim)]
    soft, shift = rng.uniform(0.0, 1.0), rng.uniform(-1.0, 1.0)

    def potential(z):
        v = np.sum(-0.5 * quad * z * z - quart * z ** 4 + lin * z, axis=-1)
        for i, j, c, k, w1, w2 in pairs:
            v = v + c * z[..., i] * z[..., j] + k * np.tanh(w1 * z[..., i]) * np.tanh(w2 * z[..., j])
        return v + soft * np.logaddexp(0.0, z.sum(axis=-1) + shift)

    return FunctionModel(lambda z: np.exp(potential(z)), dim=dim)
