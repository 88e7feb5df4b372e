"""Log-supermodularity (MTP2) and discrete log-concavity checks.

Two independent criteria are provided for log-supermodularity: an exhaustive
pair scan of ``f(x) f(y) <= f(x ^ y) f(x v y)`` and the local test on every
2x2 minor. On a box with strictly positive values they decide the same thing.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .lattice import GridFunction, LatticeFunction

Discrete = Union[LatticeFunction, GridFunction]


@dataclass
class CheckReport:
    """Outcome of one inequality check.

    ``worst_violation`` is signed (positive means the inequality failed by that
    much) and ``tolerance`` is the absolute threshold it was compared against.
    """

    check: str
    passed: bool
    worst_violation: float
    tolerance: float
    witness: list = field(default_factory=list)
    pairs_checked: int = 0
    status: str = ""
    details: dict = field(default_factory=dict)
    # in-memory artifacts (arrays, grids); never serialized
    data: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.status:
            self.status = "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        def clean(v):
            if isinstance(v, CheckReport):
                return v.to_dict()
            if isinstance(v, dict):
                return {k: clean(x) for k, x in v.items()}
            if isinstance(v, (list, tuple)):
                return [clean(x) for x in v]
            if isinstance(v, np.ndarray):
                return clean(v.tolist())
            if isinstance(v, (np.floating, np.integer, np.bool_)):
                return v.item()
            return v

        return clean({
            "check": self.check,
            "passed": bool(self.passed),
            "status": self.status,
            "worst_violation": float(self.worst_violation),
            "tolerance": float(self.tolerance),
            "witness": self.witness,
            "pairs_checked": int(self.pairs_checked),
            "details": self.details,
        })


def _values(f) -> np.ndarray:
    if isinstance(f, (LatticeFunction, GridFunction)):
        return f.values
    return np.asarray(f, dtype=float)


def _coords(f, idx) -> list:
    """Map a box index to the point it represents."""
    idx = np.asarray(idx)
    if isinstance(f, LatticeFunction):
        return (idx + np.asarray(f.lower)).tolist()
    if isinstance(f, GridFunction):
        return (np.asarray(f.origin) + f.spacing * idx).tolist()
    return idx.tolist()


def _scale(v: np.ndarray) -> float:
    m = float(np.max(v)) if v.size else 0.0
    return m * m if m > 0 else 1.0


def _window(n: int, shift: int, width: int) -> slice:
    return slice(shift, shift + width)


def pair_scan(values: np.ndarray):
    """Exhaustive scan over all incomparable pairs of box points.

    Returns ``(worst, (x_idx, y_idx), pairs)`` where ``worst`` is the largest
    value of ``f(x) f(y) - f(x ^ y) f(x v y)``. Comparable pairs are skipped:
    there ``{x ^ y, x v y} = {x, y}`` and the difference is exactly zero.

    Each incomparable pair is generated once from its meet ``m``, the offset
    ``delta = join - meet`` and the set ``S`` of axes where ``x`` takes the
    join coordinate (``S`` contains the first moving axis to avoid counting
    ``(x, y)`` and ``(y, x)`` twice).
    """
    v = np.asarray(values, dtype=float)
    shape = v.shape
    d = v.ndim
    worst = -np.inf
    witness = None
    pairs = 0
    for delta in itertools.product(*(range(n) for n in shape)):
        moving = [i for i in range(d) if delta[i] > 0]
        if len(moving) < 2:
            continue
        widths = [n - dl for n, dl in zip(shape, delta)]
        base = tuple(_window(n, 0, w) for n, w in zip(shape, widths))
        top = tuple(_window(n, dl, w) for n, dl, w in zip(shape, delta, widths))
        lo_hi = v[base] * v[top]
        first, rest = moving[0], moving[1:]
        for k in range(len(rest)):
            for extra in itertools.combinations(rest, k):
                in_s = {first, *extra}
                sx = tuple(top[i] if i in in_s else base[i] for i in range(d))
                sy = tuple(base[i] if i in in_s else top[i] for i in range(d))
                diff = v[sx] * v[sy] - lo_hi
                pairs += diff.size
                j = int(np.argmax(diff))
                if diff.flat[j] > worst:
                    worst = float(diff.flat[j])
                    m = np.array(np.unravel_index(j, diff.shape))
                    dl = np.array(delta)
                    mask = np.array([i in in_s for i in range(d)])
                    witness = (m + dl * mask, m + dl * ~mask)
    if witness is None:
        worst = 0.0
    return worst, witness, pairs


def is_log_supermodular(f: Discrete, tol: float = 1e-9) -> CheckReport:
    """Brute-force check of ``f(x) f(y) <= f(x ^ y) f(x v y)`` over the whole box.

    The tolerance is relative: a pair fails when the defect exceeds
    ``tol * max(f)**2``.
    """
    v = _values(f)
    if np.any(v < 0):
        raise ValueError("log-supermodularity is checked for nonnegative functions only")
    scale = _scale(v)
    worst, witness, pairs = pair_scan(v)
    thresh = tol * scale
    return CheckReport(
        check="lsm_brute",
        passed=worst <= thresh,
        worst_violation=worst,
        tolerance=thresh,
        witness=[] if witness is None else [_coords(f, w) for w in witness],
        pairs_checked=pairs,
        details={"scale": scale, "rel_tol": tol, "relative_violation": worst / scale},
    )


def _plane_slices(shape, i: int, j: int, di: int, dj: int) -> tuple:
    out = []
    for k, n in enumerate(shape):
        shift = (di if k == i else 0) + (dj if k == j else 0)
        out.append(slice(shift, shift + (n - 1 if k in (i, j) else n)))
    return tuple(out)


def local_minors(v: np.ndarray):
    """Yield ``(i, j, defect)`` with ``defect = f(z+e_i) f(z+e_j) - f(z) f(z+e_i+e_j)``."""
    for i, j in itertools.combinations(range(v.ndim), 2):
        s = lambda di, dj: _plane_slices(v.shape, i, j, di, dj)
        yield i, j, v[s(1, 0)] * v[s(0, 1)] - v[s(0, 0)] * v[s(1, 1)]


def mixed_differences(V: np.ndarray):
    """Yield ``(i, j, V(z) + V(z+e_i+e_j) - V(z+e_i) - V(z+e_j))`` per axis pair."""
    for i, j in itertools.combinations(range(V.ndim), 2):
        s = lambda di, dj: _plane_slices(V.shape, i, j, di, dj)
        yield i, j, V[s(0, 0)] + V[s(1, 1)] - V[s(1, 0)] - V[s(0, 1)]


def topkis_local_check(f: Discrete, tol: float = 1e-9) -> CheckReport:
    """Local criterion: every 2x2 minor of ``f`` in every coordinate plane.

    Needs ``f > 0`` on the box; an interior zero makes the result
    indeterminate (the offending cell is returned as witness).
    """
    v = _values(f)
    if v.ndim < 2:
        raise ValueError("the local criterion needs dimension >= 2")
    if np.any(v < 0):
        raise ValueError("negative values")
    scale = _scale(v)
    thresh = tol * scale
    zeros = np.argwhere(v == 0)
    if len(zeros):
        return CheckReport(
            check="lsm_topkis", passed=False, worst_violation=float("nan"), tolerance=thresh,
            witness=[_coords(f, zeros[0])], status="indeterminate",
            details={"reason": "zero value inside box, log undefined", "zero_cells": int(len(zeros)),
                     "scale": scale, "rel_tol": tol},
        )
    worst = -np.inf
    witness = []
    count = 0
    for i, j, defect in local_minors(v):
        if defect.size == 0:
            continue
        count += defect.size
        k = int(np.argmax(defect))
        if defect.flat[k] > worst:
            worst = float(defect.flat[k])
            z = np.array(np.unravel_index(k, defect.shape))
            ei = np.eye(v.ndim, dtype=int)[i]
            ej = np.eye(v.ndim, dtype=int)[j]
            witness = [_coords(f, z + ei), _coords(f, z + ej)]
    if count == 0:
        worst = 0.0
    return CheckReport(
        check="lsm_topkis", passed=worst <= thresh, worst_violation=worst, tolerance=thresh,
        witness=witness, pairs_checked=count,
        details={"scale": scale, "rel_tol": tol, "relative_violation": worst / scale},
    )


def log_minor_margin(v: np.ndarray, region: Optional[tuple] = None) -> float:
    """Smallest mixed second difference of ``log f`` (optionally over a sub-box
    given as a tuple of slices into the difference arrays)."""
    lv = np.log(np.asarray(v, dtype=float))
    margins = []
    for _, _, mixed in mixed_differences(lv):
        if region is not None:
            mixed = mixed[region]
        margins.append(float(np.min(mixed)))
    return min(margins)


def is_log_concave_1d(g, tol: float = 1e-9) -> CheckReport:
    """Discrete log-concavity: contiguous support and ``g(n)^2 >= g(n-1) g(n+1)``."""
    v = _values(g)
    if v.ndim != 1:
        raise ValueError("is_log_concave_1d needs a one-dimensional function")
    scale = _scale(v)
    thresh = tol * scale
    support = np.flatnonzero(v > 0)
    if len(support) == 0:
        return CheckReport("log_concave_1d", False, float("inf"), thresh, status="fail",
                           details={"reason": "empty support"})
    if support[-1] - support[0] + 1 != len(support):
        gap = int(support[np.argmax(np.diff(support) > 1)] + 1)
        return CheckReport("log_concave_1d", False, float("inf"), thresh,
                           witness=[_coords(g, [gap])], details={"reason": "support has a gap"})
    s = v[support[0]:support[-1] + 1]
    if len(s) < 3:
        return CheckReport("log_concave_1d", True, 0.0, thresh, details={"scale": scale})
    defect = s[2:] * s[:-2] - s[1:-1] ** 2
    k = int(np.argmax(defect))
    worst = float(defect[k])
    return CheckReport(
        "log_concave_1d", worst <= thresh, worst, thresh,
        witness=[_coords(g, [support[0] + k + 1])], pairs_checked=len(defect),
        details={"scale": scale, "rel_tol": tol},
    )


def equivalence_audit(f: Discrete, tol: float = 1e-9) -> bool:
    """True when the brute-force and local criteria return the same verdict."""
    return is_log_supermodular(f, tol).passed == topkis_local_check(f, tol).passed


def check_lsm(f: Discrete, tol: float = 1e-9, method: str = "brute"):
    """Dispatch used by the command line: ``brute``, ``topkis`` or ``both``."""
    if method == "brute":
        return is_log_supermodular(f, tol)
    if method == "topkis":
        return topkis_local_check(f, tol)
    if method == "both":
        brute = is_log_supermodular(f, tol)
        local = topkis_local_check(f, tol) if _values(f).ndim >= 2 else None
        agree = local is None or local.status == "indeterminate" or brute.passed == local.passed
        return CheckReport(
            check="lsm_both", passed=brute.passed, worst_violation=brute.worst_violation,
            tolerance=brute.tolerance, witness=brute.witness, pairs_checked=brute.pairs_checked,
            details={"brute": brute, "topkis": local, "agree": agree},
        )
    raise ValueError(f"unknown method {method!r}")
