"""Index arithmetic and the two discrete function representations.

A :class:`LatticeFunction` lives on a box of ``Z^d`` and integrates against
counting measure. A :class:`GridFunction` samples a function on the regular
grid ``origin + eps * k`` and integrates as a Riemann sum ``sum(values) * eps**d``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

MAX_DIM = 4


def _as_index(x) -> np.ndarray:
    return np.asarray(x)


def meet(x, y):
    """Componentwise minimum of two points (works on stacked points too)."""
    x, y = _as_index(x), _as_index(y)
    if x.shape[-1:] != y.shape[-1:]:
        raise ValueError(f"dimension mismatch: {x.shape[-1:]} vs {y.shape[-1:]}")
    out = np.minimum(x, y)
    return tuple(out.tolist()) if out.ndim == 1 else out


def join(x, y):
    """Componentwise maximum of two points (works on stacked points too)."""
    x, y = _as_index(x), _as_index(y)
    if x.shape[-1:] != y.shape[-1:]:
        raise ValueError(f"dimension mismatch: {x.shape[-1:]} vs {y.shape[-1:]}")
    out = np.maximum(x, y)
    return tuple(out.tolist()) if out.ndim == 1 else out


def _check_values(values: np.ndarray) -> np.ndarray:
    values = np.array(values, dtype=float)
    if values.ndim < 1 or values.ndim > MAX_DIM:
        raise ValueError(f"dimension must be between 1 and {MAX_DIM}, got {values.ndim}")
    if values.size == 0:
        raise ValueError("empty support box")
    if not np.all(np.isfinite(values)):
        raise ValueError("values must be finite")
    if np.any(values < 0):
        raise ValueError("values must be nonnegative")
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class LatticeFunction:
    """Nonnegative function on ``Z^d``, dense over ``[lower, upper]``, zero outside."""

    lower: tuple
    values: np.ndarray

    def __post_init__(self):
        values = _check_values(self.values)
        lower = tuple(int(v) for v in np.atleast_1d(self.lower))
        if len(lower) != values.ndim:
            raise ValueError(f"lower corner has length {len(lower)} but values have {values.ndim} axes")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "lower", lower)

    @classmethod
    def from_values(cls, values, lower=None) -> "LatticeFunction":
        values = np.asarray(values, dtype=float)
        if lower is None:
            lower = (0,) * values.ndim
        return cls(tuple(lower), values)

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def shape(self) -> tuple:
        return self.values.shape

    @property
    def upper(self) -> tuple:
        return tuple(lo + n - 1 for lo, n in zip(self.lower, self.shape))

    def points(self) -> np.ndarray:
        """All box points as an ``(N, d)`` integer array in row-major order."""
        axes = [np.arange(lo, lo + n) for lo, n in zip(self.lower, self.shape)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def __call__(self, x) -> np.ndarray:
        """Evaluate at integer points (``(..., d)``); zero outside the box."""
        x = np.asarray(x, dtype=np.int64)
        idx = x - np.asarray(self.lower)
        inside = np.all((idx >= 0) & (idx < np.asarray(self.shape)), axis=-1)
        out = np.zeros(x.shape[:-1])
        if np.any(inside):
            out[inside] = self.values[tuple(idx[inside].T)]
        return out

    def scaled(self, c: float) -> "LatticeFunction":
        return LatticeFunction(self.lower, self.values * c)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Nonnegative samples on the grid ``origin + spacing * k``, ``k`` in ``shape``."""

    origin: tuple
    spacing: float
    values: np.ndarray

    def __post_init__(self):
        values = _check_values(self.values)
        origin = tuple(float(v) for v in np.atleast_1d(self.origin))
        if len(origin) != values.ndim:
            raise ValueError(f"origin has length {len(origin)} but values have {values.ndim} axes")
        spacing = float(self.spacing)
        if not spacing > 0:
            raise ValueError(f"spacing must be positive, got {spacing}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", spacing)

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def shape(self) -> tuple:
        return self.values.shape

    def axis(self, i: int) -> np.ndarray:
        return self.origin[i] + self.spacing * np.arange(self.shape[i])

    def axes(self) -> list:
        return [self.axis(i) for i in range(self.dim)]

    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def scaled(self, c: float) -> "GridFunction":
        return GridFunction(self.origin, self.spacing, self.values * c)

    def normalized(self) -> "GridFunction":
        mass = integral(self)
        if mass <= 0:
            raise ValueError("cannot normalize a function with zero mass")
        return self.scaled(1.0 / mass)


Discrete = Union[LatticeFunction, GridFunction]


def integral(f: Discrete) -> float:
    """Counting-measure sum for lattices, Riemann sum for grids."""
    total = float(np.sum(f.values))
    if isinstance(f, GridFunction):
        total *= f.spacing ** f.dim
    return total


def grid_shape(lower: Sequence[float], upper: Sequence[float], eps: float) -> tuple:
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    if lower.shape != upper.shape or np.any(upper < lower):
        raise ValueError(f"invalid box: lower={lower.tolist()} upper={upper.tolist()}")
    if len(lower) > MAX_DIM:
        raise ValueError(f"dimension {len(lower)} exceeds {MAX_DIM}")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    # tolerate floating error in (upper - lower) / eps
    return tuple(int(np.floor((u - l) / eps + 1e-9)) + 1 for l, u in zip(lower, upper))


def restrict_to_lattice(model, lower, upper, eps: float) -> GridFunction:
    """Evaluate ``model`` at every point of ``eps Z^d`` inside the box ``[lower, upper]``.

    The lattice is anchored at ``lower``, so the box corner is always a grid point.
    """
    shape = grid_shape(lower, upper, eps)
    lower = tuple(float(v) for v in np.atleast_1d(lower))
    if getattr(model, "dim", len(lower)) != len(lower):
        raise ValueError(f"model has dimension {model.dim}, box has {len(lower)}")
    axes = [lo + eps * np.arange(n) for lo, n in zip(lower, shape)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack(mesh, axis=-1)
    values = np.asarray(model(pts), dtype=float).reshape(shape)
    return GridFunction(lower, eps, values)
