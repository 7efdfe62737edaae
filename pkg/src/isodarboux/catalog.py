"""Named analytic potentials, tabulated ingestion and run manifests."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CatalogError
from .grid import Grid, SampledFunction, build_grid
from .schrodinger import WaveFunction, wave_function

TOOL_VERSION = "0.1.0"

# family -> default parameters (every parameter must be present after merging)
FAMILIES = {
    "harmonic": {"omega": 1.0, "offset": 0.0},
    "poschl_teller": {"depth": 2.0, "width": 1.0, "offset": 0.0},
    "morse": {"depth": 4.0, "alpha": 1.0, "center": 0.0},
    "box": {},
    "square_well": {"depth": 2.0, "width": 2.0},
    "tabulated": {},
}

# name -> (family, params, default grid)
CATALOG = {
    "oscillator": ("harmonic", {"omega": 1.0, "offset": -1.0}, (-10.0, 10.0, 2001)),
    "harmonic": ("harmonic", {}, (-10.0, 10.0, 2001)),
    "poschl_teller": ("poschl_teller", {}, (-15.0, 15.0, 3001)),
    "morse": ("morse", {}, (-2.0, 20.0, 4401)),
    "box": ("box", {}, (0.0, 1.0, 2001)),
    "square_well": ("square_well", {}, (-10.0, 10.0, 4001)),
}


@dataclass(frozen=True)
class PotentialSpec:
    name: str
    family: str
    params: dict = field(default_factory=dict)
    analytic_ground_state: bool = True
    source_path: str | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise CatalogError(f"unknown potential family {self.family!r}")
        allowed = FAMILIES[self.family]
        extra = sorted(set(self.params) - set(allowed))
        if extra:
            raise CatalogError(f"family {self.family!r} takes no parameter(s) {extra}")
        merged = {**allowed, **{k: float(v) for k, v in self.params.items()}}
        for key, value in merged.items():
            if not math.isfinite(value):
                raise CatalogError(f"parameter {key} must be finite")
        object.__setattr__(self, "params", dict(sorted(merged.items())))
        if self.family == "tabulated" and not self.source_path:
            raise CatalogError("tabulated potentials need a source_path")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "family": self.family,
            "params": self.params,
            "analytic_ground_state": self.analytic_ground_state,
            "source_path": self.source_path,
        }


@dataclass
class RunManifest:
    spec: PotentialSpec
    grid: Grid
    shift: float = 0.0
    lambdas: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    tool_version: str = TOOL_VERSION
    outputs: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "grid": {"x_min": self.grid.x_min, "x_max": self.grid.x_max, "n": self.grid.n},
            "shift": self.shift,
            "lambdas": list(self.lambdas),
            "tolerances": dict(sorted(self.tolerances.items())),
            "tool_version": self.tool_version,
            "outputs": list(self.outputs),
        }


def lookup(name: str, params: dict | None = None, source_path: str | None = None) -> tuple[PotentialSpec, Grid]:
    """Catalog entry ``name`` (or a bare family name) with overrides, plus its default grid."""
    params = dict(params or {})
    if name in CATALOG:
        family, base, bounds = CATALOG[name]
        return PotentialSpec(name, family, {**base, **params}), build_grid(*bounds)
    if name == "tabulated":
        if source_path is None:
            raise CatalogError("tabulated potentials need a source file")
        xs, _ = read_table(source_path)
        return PotentialSpec(name, "tabulated", params, False, str(source_path)), build_grid(xs[0], xs[-1], len(xs))
    raise CatalogError(f"unknown potential {name!r}; known: {sorted(CATALOG) + ['tabulated']}")


# -- closed forms -----------------------------------------------------------------

def _harmonic(x, p):
    w = p["omega"]
    if not w > 0:
        raise CatalogError("omega must be positive")
    V = w * w * x * x + p["offset"]
    return V, np.exp(-0.5 * w * x * x), w + p["offset"]


def _poschl_teller(x, p):
    depth, a = p["depth"], p["width"]
    if not (depth > 0 and a > 0):
        raise CatalogError("depth and width must be positive")
    nu = 0.5 * (math.sqrt(1.0 + 4.0 * depth * a * a) - 1.0)
    s = 1.0 / np.cosh(x / a)
    return -depth * s * s + p["offset"], s ** nu, -(nu / a) ** 2 + p["offset"]


def _morse(x, p):
    depth, a = p["depth"], p["alpha"]
    if not (depth > 0 and a > 0):
        raise CatalogError("depth and alpha must be positive")
    lam = math.sqrt(depth) / a
    if not lam > 0.5:
        raise CatalogError("morse well too shallow to bind a state")
    e = np.exp(-a * (x - p["center"]))
    u0 = np.exp(-lam * e - (lam - 0.5) * a * (x - p["center"]))
    return depth * (e * e - 2.0 * e), u0, -(a * (lam - 0.5)) ** 2


def _square_well(x, p, h):
    depth, width = p["depth"], p["width"]
    if not width > 0:
        raise CatalogError("width must be positive")
    d = np.abs(x) - 0.5 * width
    V = np.where(d < 0, -depth, 0.0)
    # nodes on the discontinuity take the midpoint value
    return np.where(np.abs(d) <= 1e-9 * max(h, 1.0), -0.5 * depth, V)


def resolve_potential(spec: PotentialSpec, grid: Grid) -> tuple[SampledFunction, WaveFunction | None]:
    """Sample ``V`` on ``grid``; the closed-form ground state comes along when known."""
    p, x = spec.params, grid.x
    analytic = None
    if spec.family == "harmonic":
        V, u0, E0 = _harmonic(x, p)
        analytic = (u0, E0)
    elif spec.family == "poschl_teller":
        V, u0, E0 = _poschl_teller(x, p)
        analytic = (u0, E0)
    elif spec.family == "morse":
        V, u0, E0 = _morse(x, p)
        analytic = (u0, E0)
    elif spec.family == "box":
        L = grid.x_max - grid.x_min
        V = np.zeros(grid.n)
        u0 = np.sin(math.pi * (x - grid.x_min) / L)
        u0[[0, -1]] = 0.0
        analytic = (u0, (math.pi / L) ** 2)
    elif spec.family == "square_well":
        V = _square_well(x, p, grid.h)
    else:
        xs, vs = read_table(spec.source_path)
        if grid.x_min < xs[0] - 1e-12 or grid.x_max > xs[-1] + 1e-12:
            raise CatalogError("grid extends beyond the tabulated range")
        V = np.interp(x, xs, vs)
    meta = {"potential": spec.name}
    if spec.family == "box":
        meta["hard_walls"] = True
    Vs = SampledFunction(grid, V, meta=meta)
    if analytic is None or not spec.analytic_ground_state:
        return Vs, None
    u0, E0 = analytic
    return Vs, wave_function(SampledFunction(grid, u0, meta=dict(meta)), E0)


# -- tables ----------------------------------------------------------------------

def read_columns(path, allow_nan: bool = False) -> dict:
    """All columns of a headered CSV, keyed by header; ``x`` strictly increasing.

    ``allow_nan`` admits masked (``nan``) samples, as written for
    superpotentials; potentials must be finite.
    """
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
    except OSError as exc:
        raise CatalogError(f"cannot read table {path}: {exc}") from exc
    if len(rows) < 3:
        raise CatalogError(f"table {path} needs a header and at least two rows")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2 or len(set(header)) != len(header):
        raise CatalogError(f"table {path} needs at least two distinct column names")
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise CatalogError(f"malformed table {path}: {exc}") from exc
    if data.ndim != 2 or data.shape[1] != len(header):
        raise CatalogError(f"malformed table {path}: ragged rows")
    bad = ~np.isfinite(data)
    if bad[:, 0].any() or (bad.any() and not (allow_nan and not np.isinf(data).any())):
        raise CatalogError(f"table {path} contains non-finite values")
    if np.any(np.diff(data[:, 0]) <= 0):
        raise CatalogError(f"x column of {path} is not strictly increasing")
    return {name: data[:, i] for i, name in enumerate(header)}


def read_table(path) -> tuple[np.ndarray, np.ndarray]:
    """``(x, value)`` from a two-column potential table."""
    cols = list(read_columns(path).values())
    if len(cols) != 2:
        raise CatalogError(f"potential table {path} must have exactly two columns")
    return cols[0], cols[1]


def format_csv(x: np.ndarray, columns: dict) -> str:
    """Header row plus ``%.17g`` rows, LF line endings."""
    names = ["x", *columns]
    cols = [np.asarray(x), *(np.asarray(c) for c in columns.values())]
    lines = [",".join(names)]
    for row in zip(*cols):
        lines.append(",".join("%.17g" % v for v in row))
    return "\n".join(lines) + "\n"


def write_csv(path, x: np.ndarray, columns: dict) -> Path:
    path = Path(path)
    with path.open("w", newline="\n") as fh:
        fh.write(format_csv(x, columns))
    return path


def jsonable(obj):
    """Plain JSON types; non-finite floats become ``None``, complex becomes ``[re, im]``."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        return [jsonable(obj.real), jsonable(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    body = {"version": TOOL_VERSION, **jsonable(payload)}
    with path.open("w", newline="\n") as fh:
        fh.write(json.dumps(body, sort_keys=True, indent=2, allow_nan=False) + "\n")
    return path


__all__ = [
    "CATALOG",
    "FAMILIES",
    "PotentialSpec",
    "RunManifest",
    "TOOL_VERSION",
    "format_csv",
    "jsonable",
    "lookup",
    "read_columns",
    "read_table",
    "resolve_potential",
    "write_csv",
    "write_json",
]
