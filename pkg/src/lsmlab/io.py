"""File formats and the report envelope.

Grids and lattices are JSON with row-major flat ``values``. Python's float
``repr`` is the shortest string that round-trips, so values survive a save and
load bit for bit. One-dimensional densities may also be CSV files with two
columns (coordinate, value).
"""
from __future__ import annotations

import csv
import json
import warnings
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import __version__
from .lattice import MAX_DIM, GridFunction, LatticeFunction


class SchemaError(ValueError):
    """Malformed input file; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str, source: Optional[str] = None):
        self.field = field
        self.source = source
        where = f"{source}: " if source else ""
        super().__init__(f"{where}field '{field}': {message}")


class MassWarning(UserWarning):
    pass


def _require(d: dict, key: str, source=None):
    if key not in d:
        raise SchemaError(key, "missing", source)
    return d[key]


def _dim(d: dict, source=None) -> int:
    dim = _require(d, "dim", source)
    if not isinstance(dim, int) or isinstance(dim, bool) or not 1 <= dim <= MAX_DIM:
        raise SchemaError("dim", f"must be an integer in 1..{MAX_DIM}, got {dim!r}", source)
    return dim


def _int_vector(d: dict, key: str, dim: int, source=None) -> tuple:
    v = _require(d, key, source)
    if not isinstance(v, list) or len(v) != dim or not all(isinstance(x, int) for x in v):
        raise SchemaError(key, f"must be a list of {dim} integers", source)
    return tuple(v)


def _values(d: dict, shape: tuple, source=None) -> np.ndarray:
    raw = _require(d, "values", source)
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        raise SchemaError("values", "must be numbers", source) from None
    if arr.size != int(np.prod(shape)):
        raise SchemaError("values", f"has {arr.size} entries, shape {list(shape)} needs {int(np.prod(shape))}",
                          source)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise SchemaError("values", "must be finite and nonnegative", source)
    return arr.reshape(shape)


# ------------------------------------------------------------------ dicts


def grid_to_dict(g: GridFunction) -> dict:
    return {"kind": "grid", "dim": g.dim, "origin": list(g.origin), "spacing": g.spacing,
            "shape": list(g.shape), "values": g.values.ravel().tolist()}


def grid_from_dict(d: dict, source=None) -> GridFunction:
    dim = _dim(d, source)
    shape = _int_vector(d, "shape", dim, source)
    origin = _require(d, "origin", source)
    if not isinstance(origin, list) or len(origin) != dim:
        raise SchemaError("origin", f"must be a list of {dim} numbers", source)
    spacing = _require(d, "spacing", source)
    if not isinstance(spacing, (int, float)) or not spacing > 0:
        raise SchemaError("spacing", "must be a positive number", source)
    return GridFunction(tuple(float(o) for o in origin), float(spacing), _values(d, shape, source))


def lattice_to_dict(f: LatticeFunction) -> dict:
    return {"kind": "lattice", "dim": f.dim, "lower": list(f.lower), "upper": list(f.upper),
            "values": f.values.ravel().tolist()}


def lattice_from_dict(d: dict, source=None) -> LatticeFunction:
    dim = _dim(d, source)
    lower = _int_vector(d, "lower", dim, source)
    upper = _int_vector(d, "upper", dim, source)
    if any(u < l for l, u in zip(lower, upper)):
        raise SchemaError("upper", "must be >= lower in every coordinate", source)
    shape = tuple(u - l + 1 for l, u in zip(lower, upper))
    return LatticeFunction(lower, _values(d, shape, source))


def from_dict(d: dict, source=None):
    """Dispatch on ``kind`` (or, failing that, on the keys present)."""
    from .models import model_from_dict

    if not isinstance(d, dict):
        raise SchemaError("<root>", "expected a JSON object", source)
    kind = d.get("kind")
    if kind is None:
        kind = "model" if "family" in d else "grid" if "spacing" in d else "lattice" if "lower" in d else None
    if kind == "grid":
        return grid_from_dict(d, source)
    if kind == "lattice":
        return lattice_from_dict(d, source)
    if kind == "model":
        try:
            return model_from_dict(d)
        except KeyError as e:
            raise SchemaError(str(e.args[0]), "missing", source) from None
        except ValueError as e:
            raise SchemaError("family", str(e), source) from None
    raise SchemaError("kind", f"cannot tell what this file holds (kind={kind!r})", source)


def to_dict(obj) -> dict:
    if isinstance(obj, GridFunction):
        return grid_to_dict(obj)
    if isinstance(obj, LatticeFunction):
        return lattice_to_dict(obj)
    d = obj.to_dict()
    return {"kind": "model", **d}


# ------------------------------------------------------------------ files


def save(obj, path) -> None:
    Path(path).write_text(json.dumps(to_dict(obj)) + "\n")


def _read_csv(path: Path):
    xs, vs = [], []
    with path.open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            if len(row) != 2:
                raise SchemaError(f"line {lineno}", f"expected 2 columns, got {len(row)}", str(path))
            try:
                xs.append(float(row[0]))
                vs.append(float(row[1]))
            except ValueError:
                if lineno == 1 and not xs:
                    continue  # header
                raise SchemaError(f"line {lineno}", "non-numeric entry", str(path)) from None
    if len(xs) < 2:
        raise SchemaError("rows", "need at least two data rows", str(path))
    x, v = np.asarray(xs), np.asarray(vs)
    if np.any(np.diff(x) < 0):
        raise SchemaError("coordinate", "must be nondecreasing", str(path))
    if np.any(v < 0) or not np.all(np.isfinite(v)):
        raise SchemaError("value", "must be finite and nonnegative", str(path))
    return x, v


def _warn_mass(mass: float, path) -> None:
    if abs(mass - 1.0) > 1e-9:
        warnings.warn(f"{path}: density mass is {mass:.12g}; normalizing", MassWarning, stacklevel=3)


def load(path):
    """Load any JSON input file, or a 1-D grid from CSV.

    A CSV density is normalized (with a warning if its mass was not 1); its
    coordinates must be equally spaced to form a grid.
    """
    path = Path(path)
    if path.suffix.lower() == ".csv":
        x, v = _read_csv(path)
        h = np.diff(x)
        if not np.allclose(h, h[0], rtol=1e-9, atol=0.0):
            raise SchemaError("coordinate", "must be equally spaced for a grid; use load_density1d",
                              str(path))
        mass = float(v.sum() * h[0])
        _warn_mass(mass, path)
        return GridFunction((float(x[0]),), float(h[0]), v / mass)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise SchemaError(f"line {e.lineno}", e.msg, str(path)) from None
    return from_dict(data, str(path))


def load_density1d(path):
    """Load a 1-D density for transport: CSV (any nondecreasing nodes) or a 1-D JSON grid."""
    from .transport import Density1D

    path = Path(path)
    if path.suffix.lower() == ".csv":
        x, v = _read_csv(path)
    else:
        g = load(path)
        if not isinstance(g, GridFunction) or g.dim != 1:
            raise SchemaError("dim", "transport needs a one-dimensional grid", str(path))
        x, v = g.axis(0), g.values
    nu = Density1D(x, v)
    _warn_mass(nu.raw_mass, path)
    return nu


def write_curves(path, columns: dict) -> None:
    """CSV with one named column per entry (shorter columns padded with blanks)."""
    names = list(columns)
    cols = [np.asarray(columns[n], dtype=float).ravel() for n in names]
    rows = max(len(c) for c in cols)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for i in range(rows):
            w.writerow([repr(float(c[i])) if i < len(c) else "" for c in cols])


# ------------------------------------------------------------------ reports


def clean(v: Any):
    """Recursively turn numpy scalars/arrays and reports into JSON-ready values."""
    from .lsm import CheckReport

    if isinstance(v, CheckReport):
        return v.to_dict()
    if isinstance(v, dict):
        return {str(k): clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [clean(x) for x in v]
    if isinstance(v, np.ndarray):
        return clean(v.tolist())
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    return v


def _pretty(v):
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, int):
        return v
    if isinstance(v, dict):
        return {k: _pretty(x) for k, x in v.items()}
    if isinstance(v, list):
        return [_pretty(x) for x in v[:8]] + (["..."] if len(v) > 8 else [])
    return str(v)


def envelope(check: str, result, seed: Optional[int] = None, tolerances: Optional[dict] = None,
             params: Optional[dict] = None, passed: Optional[bool] = None) -> dict:
    """The one report schema: ``check`` discriminator, everything needed to re-run,
    the full-precision ``result`` and a rounded ``pretty`` digest."""
    body = clean(result)
    if passed is None and isinstance(body, dict):
        passed = body.get("passed")
    summary_keys = ("passed", "status", "worst_violation", "tolerance", "failures", "instances",
                    "worst_margin", "S")
    digest = {k: body[k] for k in summary_keys if isinstance(body, dict) and k in body}
    return {
        "tool": "lsmlab",
        "version": __version__,
        "check": check,
        "passed": None if passed is None else bool(passed),
        "seed": seed,
        "tolerances": clean(tolerances or {}),
        "params": clean(params or {}),
        "result": body,
        "pretty": _pretty(digest),
    }


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def save_report(report: dict, path) -> None:
    Path(path).write_text(dumps_report(report))


def load_report(path) -> dict:
    data = json.loads(Path(path).read_text())
    for key in ("tool", "version", "check", "result"):
        _require(data, key, str(path))
    return data
