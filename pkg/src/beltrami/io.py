"""BFG1 grid files, legacy VTK export and JSON reports."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import GridError
from .grid import Grid, ScalarFieldGrid, VectorFieldGrid

REPORT_SCHEMA = "beltrami-report/1"


def _fmt(v):
    return format(float(v), ".17g")


def write_bfg1(path, field):
    """Write a scalar or vector field; nodes are listed with x varying fastest."""
    g = field.grid
    kind = "vector" if isinstance(field, VectorFieldGrid) else "scalar"
    lines = [
        "bfg1",
        f"coords {g.coords.value}",
        "origin " + " ".join(_fmt(v) for v in g.origin),
        "spacing " + " ".join(_fmt(v) for v in g.spacing),
        "dims " + " ".join(str(n) for n in g.dims),
        f"kind {kind}",
    ]
    if kind == "scalar":
        lines.extend(_fmt(v) for v in field.values.ravel(order="F"))
    else:
        cols = [field.values[i].ravel(order="F") for i in range(3)]
        lines.extend(f"{_fmt(a)} {_fmt(b)} {_fmt(c)}" for a, b, c in zip(*cols))
    Path(path).write_text("\n".join(lines) + "\n")


def read_bfg1(path):
    text = Path(path).read_text().splitlines()
    if not text or text[0].strip() != "bfg1":
        raise GridError(f"{path}: not a BFG1 file")
    header = {}
    for line in text[1:6]:
        key, _, rest = line.strip().partition(" ")
        header[key] = rest.split()
    try:
        grid = Grid(
            tuple(map(float, header["origin"])),
            tuple(map(float, header["spacing"])),
            tuple(map(int, header["dims"])),
            header["coords"][0],
        )
        kind = header["kind"][0]
    except (KeyError, IndexError, ValueError) as exc:
        raise GridError(f"{path}: malformed BFG1 header ({exc})") from exc
    body = [ln for ln in text[6:] if ln.strip()]
    n = int(np.prod(grid.dims))
    if len(body) != n:
        raise GridError(f"{path}: expected {n} nodes, found {len(body)}")
    data = np.array([ln.split() for ln in body], dtype=float)
    if kind == "scalar":
        return ScalarFieldGrid(grid, data[:, 0].reshape(grid.dims, order="F"))
    if kind == "vector":
        vals = np.stack([data[:, i].reshape(grid.dims, order="F") for i in range(3)])
        return VectorFieldGrid(grid, vals)
    raise GridError(f"{path}: unknown kind {kind!r}")


def write_vtk(path, fields, title="beltrami"):
    """Legacy ASCII structured-points file holding several fields on one grid.

    ``fields`` maps names to scalar or vector fields.  Cylindrical grids are
    written in their (r, theta, z) index space.
    """
    fields = dict(fields)
    grid = next(iter(fields.values())).grid
    nx, ny, nz = grid.dims
    out = [
        "# vtk DataFile Version 3.0",
        title[:255],
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {nx} {ny} {nz}",
        "ORIGIN " + " ".join(_fmt(v) for v in grid.origin),
        "SPACING " + " ".join(_fmt(v) for v in grid.spacing),
        f"POINT_DATA {nx * ny * nz}",
    ]
    for name, fld in fields.items():
        if fld.grid != grid:
            raise GridError("all VTK fields must share one grid")
        if isinstance(fld, VectorFieldGrid):
            out.append(f"VECTORS {name} double")
            cols = [fld.values[i].ravel(order="F") for i in range(3)]
            out.extend(f"{_fmt(a)} {_fmt(b)} {_fmt(c)}" for a, b, c in zip(*cols))
        else:
            out.append(f"SCALARS {name} double 1")
            out.append("LOOKUP_TABLE default")
            out.extend(_fmt(v) for v in fld.values.ravel(order="F"))
    Path(path).write_text("\n".join(out) + "\n")


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def report_json(payload):
    """Deterministic JSON text with the schema tag added."""
    body = {"schema": REPORT_SCHEMA}
    body.update(_clean(payload))
    return json.dumps(body, sort_keys=True, indent=2) + "\n"


def write_report(path, payload):
    Path(path).write_text(report_json(payload))
