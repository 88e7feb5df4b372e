"""Closed-form densities that can be evaluated anywhere, not just on a grid.

Every model is a callable taking points of shape ``(..., d)`` (a bare scalar or
1-D array is accepted for ``d == 1``) and returning values of shape ``(...)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .lattice import GridFunction

_LOG_FLOOR = 1e-300


def _points(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    if x.shape[-1] != dim:
        raise ValueError(f"expected points with last axis {dim}, got shape {x.shape}")
    return x


class DensityModel:
    """Base class. Subclasses set ``family`` and ``dim`` and implement ``_eval``."""

    family = "abstract"
    dim = 1

    def __call__(self, x) -> np.ndarray:
        return self._eval(_points(x, self.dim))

    def log(self, x) -> np.ndarray:
        return np.log(np.maximum(self(x), _LOG_FLOOR))

    def to_dict(self) -> dict:
        raise TypeError(f"{type(self).__name__} is not serializable")


@dataclass(frozen=True, eq=False)
class Gaussian(DensityModel):
    mean: np.ndarray
    cov: np.ndarray
    family = "gaussian"

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        if cov.shape != (len(mean), len(mean)):
            raise ValueError(f"covariance shape {cov.shape} does not match mean length {len(mean)}")
        if not np.allclose(cov, cov.T):
            raise ValueError("covariance must be symmetric")
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise ValueError("covariance must be positive definite") from None
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "_chol", chol)

    @classmethod
    def standard(cls, dim: int) -> "Gaussian":
        return cls(np.zeros(dim), np.eye(dim))

    @classmethod
    def bivariate(cls, rho: float, var=(1.0, 1.0)) -> "Gaussian":
        s1, s2 = np.sqrt(var)
        return cls(np.zeros(2), [[s1 * s1, rho * s1 * s2], [rho * s1 * s2, s2 * s2]])

    @property
    def dim(self) -> int:
        return len(self.mean)

    def _logeval(self, x):
        z = np.linalg.solve(self._chol, (x - self.mean).reshape(-1, self.dim).T).T
        logdet = 2.0 * np.sum(np.log(np.diag(self._chol)))
        out = -0.5 * np.sum(z * z, axis=-1) - 0.5 * (self.dim * np.log(2 * np.pi) + logdet)
        return out.reshape(x.shape[:-1])

    def _eval(self, x):
        return np.exp(self._logeval(x))

    def log(self, x):
        return self._logeval(_points(x, self.dim))

    def to_dict(self):
        return {"family": self.family, "mean": self.mean.tolist(), "cov": self.cov.tolist()}


@dataclass(frozen=True, eq=False)
class UniformBox(DensityModel):
    lower: np.ndarray
    upper: np.ndarray
    family = "uniform_box"

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.shape != hi.shape or np.any(hi <= lo):
            raise ValueError("uniform box needs lower < upper componentwise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return len(self.lower)

    def _eval(self, x):
        inside = np.all((x >= self.lower) & (x <= self.upper), axis=-1)
        return inside / np.prod(self.upper - self.lower)

    def to_dict(self):
        return {"family": self.family, "lower": self.lower.tolist(), "upper": self.upper.tolist()}


@dataclass(frozen=True, eq=False)
class ExpConcavePL(DensityModel):
    """``exp(min_k (slope_k * x + intercept_k))`` on ``[lower, upper]``, zero outside.

    The minimum of affine functions is concave, so the density is log-concave.
    """

    slopes: np.ndarray
    intercepts: np.ndarray
    lower: float = -np.inf
    upper: float = np.inf
    family = "exp_of_concave_piecewise_linear"
    dim = 1

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.slopes, dtype=float))
        b = np.atleast_1d(np.asarray(self.intercepts, dtype=float))
        if a.shape != b.shape:
            raise ValueError("slopes and intercepts must have equal length")
        object.__setattr__(self, "slopes", a)
        object.__setattr__(self, "intercepts", b)

    def _potential(self, x):
        return np.min(x * self.slopes + self.intercepts, axis=-1)

    def _eval(self, x):
        v = np.exp(self._potential(x))
        return np.where((x[..., 0] >= self.lower) & (x[..., 0] <= self.upper), v, 0.0)

    def to_dict(self):
        return {"family": self.family, "slopes": self.slopes.tolist(),
                "intercepts": self.intercepts.tolist(),
                "lower": float(self.lower), "upper": float(self.upper)}


@dataclass(frozen=True, eq=False)
class PowerExp(DensityModel):
    """``scale * x**power * exp(-rate * x**shape)`` for ``x > 0``, zero otherwise.

    For ``power >= 0``, ``rate > 0`` and ``shape >= 1``, ``u -> f(u**(1/a))`` is
    log-concave for every ``a`` in ``(0, 1]`` and ``u -> f(exp(u))`` is too.
    """

    power: float = 0.0
    rate: float = 1.0
    shape: float = 1.0
    scale: float = 1.0
    family = "power_exp"
    dim = 1

    def _eval(self, x):
        t = x[..., 0]
        pos = t > 0
        safe = np.where(pos, t, 1.0)
        v = self.scale * safe ** self.power * np.exp(-self.rate * safe ** self.shape)
        return np.where(pos, v, 0.0)

    def to_dict(self):
        return {"family": self.family, "power": self.power, "rate": self.rate,
                "shape": self.shape, "scale": self.scale}


@dataclass(frozen=True, eq=False)
class Product(DensityModel):
    """``f(z) = prod_i f_i(z_i)`` for 1-D factors."""

    factors: tuple
    family = "product"

    def __post_init__(self):
        factors = tuple(self.factors)
        for fac in factors:
            if fac.dim != 1:
                raise ValueError("product factors must be one-dimensional")
        object.__setattr__(self, "factors", factors)

    @property
    def dim(self) -> int:
        return len(self.factors)

    def _eval(self, x):
        out = np.ones(x.shape[:-1])
        for i, fac in enumerate(self.factors):
            out = out * fac(x[..., i:i + 1])
        return out

    def to_dict(self):
        return {"family": self.family, "factors": [f.to_dict() for f in self.factors]}


@dataclass(frozen=True, eq=False)
class Mixture(DensityModel):
    components: tuple
    weights: np.ndarray
    family = "mixture"

    def __post_init__(self):
        comps = tuple(self.components)
        w = np.asarray(self.weights, dtype=float)
        if len(comps) != len(w) or np.any(w < 0):
            raise ValueError("mixture needs one nonnegative weight per component")
        if len({c.dim for c in comps}) != 1:
            raise ValueError("mixture components must share a dimension")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.components[0].dim

    def _eval(self, x):
        return sum(w * c._eval(x) for w, c in zip(self.weights, self.components))

    def to_dict(self):
        return {"family": self.family, "weights": self.weights.tolist(),
                "components": [c.to_dict() for c in self.components]}


@dataclass(frozen=True, eq=False)
class Tabulated(DensityModel):
    """Multilinear interpolation of a grid; zero outside the grid box."""

    grid: GridFunction
    family = "tabulated"

    def __post_init__(self):
        interp = RegularGridInterpolator(self.grid.axes(), self.grid.values, method="linear",
                                         bounds_error=False, fill_value=0.0)
        object.__setattr__(self, "_interp", interp)

    @property
    def dim(self) -> int:
        return self.grid.dim

    def _eval(self, x):
        return np.maximum(self._interp(x.reshape(-1, self.dim)).reshape(x.shape[:-1]), 0.0)

    def to_dict(self):
        from .io import grid_to_dict
        return {"family": self.family, "grid": grid_to_dict(self.grid)}


@dataclass(frozen=True, eq=False)
class FunctionModel(DensityModel):
    """Wrap an arbitrary vectorized function of points ``(..., d)``."""

    fn: Callable
    dim: int = 1
    family = "callable"

    def _eval(self, x):
        return np.asarray(self.fn(x), dtype=float)


def model_from_dict(d: dict) -> DensityModel:
    family = d.get("family")
    if family == "gaussian":
        return Gaussian(d["mean"], d["cov"])
    if family == "uniform_box":
        return UniformBox(d["lower"], d["upper"])
    if family == "exp_of_concave_piecewise_linear":
        return ExpConcavePL(d["slopes"], d["intercepts"], d.get("lower", -np.inf), d.get("upper", np.inf))
    if family == "power_exp":
        return PowerExp(d.get("power", 0.0), d.get("rate", 1.0), d.get("shape", 1.0), d.get("scale", 1.0))
    if family == "product":
        return Product(tuple(model_from_dict(f) for f in d["factors"]))
    if family == "mixture":
        return Mixture(tuple(model_from_dict(c) for c in d["components"]), d["weights"])
    if family == "tabulated":
        from .io import grid_from_dict
        return Tabulated(grid_from_dict(d["grid"]))
    raise ValueError(f"unknown density family: {family!r}")


def log_concavity_audit(model: DensityModel, lower: float, upper: float, n: int = 2001,
                        tol: float = 1e-9) -> tuple[bool, float]:
    """Check concavity of ``log model`` on ``[lower, upper]`` by second differences.

    Returns ``(ok, worst)`` where ``worst`` is the largest second difference of the
    log (positive means a convexity defect). Zeros must sit on a contiguous edge set.
    """
    x = np.linspace(lower, upper, n)
    v = model(x)
    pos = v > 0
    if not pos.any():
        return False, np.inf
    idx = np.flatnonzero(pos)
    if idx[-1] - idx[0] + 1 != len(idx):
        return False, np.inf
    lv = np.log(v[idx])
    if len(lv) < 3:
        return True, 0.0
    worst = float(np.max(lv[2:] - 2 * lv[1:-1] + lv[:-2]))
    return worst <= tol, worst


def product_of(models: Sequence[DensityModel]) -> Product:
    return Product(tuple(models))
