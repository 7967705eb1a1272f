"""Command line front end: ``beltrami <subcommand> [options]``.

Every run writes ``report.json`` (schema ``beltrami-report/1``) into
``--out`` and echoes it on stdout.  Fields are written as BFG1 unless
``--no-fields`` is given; ``--vtk`` adds a legacy VTK file.

Options may also come from ``--config FILE`` holding ``key = value`` lines
named like the long flags; flags given on the command line win.

Exit status: 0 success, 2 bad input or configuration, 3 numerical failure,
4 indeterminate classification.
"""
from __future__ import annotations

import argparse
import os
import sys
from contextlib import nullcontext
from pathlib import Path

import numpy as np

from . import errors as E
from .cauchy import CauchySlice, march, recover_f
from .expr import as_expr, sample, to_string
from .frame_pde import cylinder_ode_solve
from .frames import adapted_frame, frame_invariants, structure_residual, umbilic_classify
from .grid import Grid, ScalarFieldGrid, VectorFieldGrid
from .io import read_bfg1, report_json, write_bfg1, write_vtk
from .obstruction import Case, classify
from .reference import ABC, Cylinder, HarmonicGradient, Lundquist, PlanarCR, materialize
from .symmetric import (
    NewtonOptions,
    assemble_rotation,
    assemble_translation,
    solve_rotation,
    solve_translation,
    verify_beltrami,
)

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL, EXIT_INDETERMINATE = 0, 2, 3, 4

INPUT_ERRORS = (
    E.ParseError, E.UnboundVariable, E.DomainError, E.GridError, E.NonFiniteInput,
    E.NotUnit, E.CRViolation, E.NotHarmonic, ValueError, KeyError, OSError,
)
NUMERICAL_ERRORS = (
    E.NewtonDiverged, E.BlowUp, E.U3Vanished, E.GradientTooSmall,
    E.AmbiguousPrincipalDirections, E.StepOutOfDomain, E.IncompatibleInitialData,
)


class UsageError(Exception):
    pass


# ----------------------------------------------------------------------------
# argument helpers

def _floats(text, n=None, what="value"):
    try:
        vals = tuple(float(v) for v in str(text).replace(",", " ").split())
    except ValueError:
        raise UsageError(f"bad {what}: {text!r}") from None
    if n is not None and len(vals) != n:
        raise UsageError(f"{what} needs {n} numbers, got {text!r}")
    return vals


def _grid_from_args(a):
    explicit = any(getattr(a, k, None) is not None for k in ("origin", "spacing", "dims"))
    if a.grid and explicit:
        raise UsageError("give either --grid or --origin/--spacing/--dims, not both")
    if a.grid:
        parts = a.grid.split(":")
        if len(parts) not in (3, 4):
            raise UsageError("--grid is 'x0,y0,z0:x1,y1,z1:nx,ny,nz[:coords]'")
        lo = _floats(parts[0], 3, "grid lower corner")
        hi = _floats(parts[1], 3, "grid upper corner")
        dims = tuple(int(v) for v in _floats(parts[2], 3, "grid dims"))
        coords = parts[3] if len(parts) == 4 else a.coords
        return Grid.box(lo, hi, dims, coords)
    if not (a.origin and a.spacing and a.dims):
        raise UsageError("a grid is required: --grid or all of --origin, --spacing, --dims")
    dims = tuple(int(v) for v in _floats(a.dims, 3, "dims"))
    return Grid(_floats(a.origin, 3, "origin"), _floats(a.spacing, 3, "spacing"), dims, a.coords)


def _scalar_input(a, name):
    """Scalar field from ``--NAME expr`` or ``--NAME-file path`` (exactly one)."""
    expr = getattr(a, name, None)
    path = getattr(a, f"{name}_file", None)
    if (expr is None) == (path is None):
        raise UsageError(f"give exactly one of --{name} and --{name}-file")
    if path is not None:
        fld = read_bfg1(path)
        if not isinstance(fld, ScalarFieldGrid):
            raise UsageError(f"{path} holds a vector field, expected a scalar")
        return fld, {"file": os.path.basename(path)}
    e = as_expr(expr)
    grid = _grid_from_args(a)
    return sample(e, grid), {"expr": to_string(e)}


def _vector_file(path):
    fld = read_bfg1(path)
    if not isinstance(fld, VectorFieldGrid):
        raise UsageError(f"{path} holds a scalar field, expected a vector")
    return fld


# ----------------------------------------------------------------------------
# subcommands; each returns (payload, fields to write, exit status)

def cmd_classify(a):
    f, src = _scalar_input(a, "f")
    res = classify(f, eps=a.eps, order=a.order)
    payload = {"command": "classify", "f": src, "result": res.to_dict(f.grid)}
    status = EXIT_INDETERMINATE if res.case is Case.INDETERMINATE_MIXED else EXIT_OK
    return payload, {"f": f}, status


def cmd_frame(a):
    f, src = _scalar_input(a, "f")
    principal = {"auto": None, "yes": True, "no": False}[a.principal]
    fr = adapted_frame(f, a.tol, principal=principal, umbilic_eps=a.umbilic_eps, ordering=a.ordering, order=a.order)
    inv = frame_invariants(f, fr, a.order)
    fields = {"e1": fr.e1, "e2": fr.e2, "e3": fr.e3}
    fields.update(inv.fields())
    payload = {
        "command": "frame",
        "f": src,
        "grid": f.grid.descriptor(),
        "principal": fr.principal,
        "seam": fr.seam,
        "ordering": a.ordering,
        "umbilic": umbilic_classify(inv, a.umbilic_eps).value,
        "orthonormality_error": fr.orthonormality_error(),
        "structure_residual": structure_residual(fr, inv).sup(),
        "sup_norms": {k: v.sup() for k, v in inv.fields().items()},
    }
    return payload, fields, EXIT_OK


def cmd_construct(a):
    grid = _grid_from_args(a)
    if (a.bc is None) == (a.bc_file is None):
        raise UsageError("give exactly one of --bc and --bc-file")
    if a.bc_file:
        bc = read_bfg1(a.bc_file)
        bc_src = {"file": os.path.basename(a.bc_file)}
    else:
        bc = as_expr(a.bc)
        bc_src = {"expr": to_string(bc)}
    opts = NewtonOptions(a.max_iter, a.newton_tol, a.damping_floor)
    solver = solve_translation if a.symmetry == "translation" else solve_rotation
    fs = solver(a.phi, grid, bc, opts)
    if a.symmetry == "translation":
        u, f = assemble_translation(fs, nz=a.extrude, order=a.order)
    else:
        u, f = assemble_rotation(fs, ntheta=a.extrude, order=a.order)
    rep = verify_beltrami(u, f, order=a.order)
    payload = {
        "command": "construct",
        "symmetry": a.symmetry,
        "phi": to_string(fs.Phi),
        "phi_prime": to_string(fs.PhiPrime),
        "bc": bc_src,
        "grid": grid.descriptor(),
        "newton": {"iterations": fs.iterations, "residual": fs.residual, "history": fs.history,
                   "tol": opts.tol, "max_iter": opts.max_iter},
        "verify": rep.as_dict(),
    }
    return payload, {"H": fs.H, "u": u, "f": f}, EXIT_OK


def cmd_verify(a):
    u = _vector_file(a.u)
    if (a.f is None) == (a.f_file is None):
        raise UsageError("give exactly one of --f and --f-file")
    if a.f_file:
        f = read_bfg1(a.f_file)
        src = {"file": os.path.basename(a.f_file)}
    else:
        e = as_expr(a.f)
        f = sample(e, u.grid)
        src = {"expr": to_string(e)}
    rep = verify_beltrami(u, f, order=a.order)
    h = u.grid.min_spacing()
    payload = {
        "command": "verify",
        "u": {"file": os.path.basename(a.u)},
        "f": src,
        "grid": u.grid.descriptor(),
        "order": a.order,
        "residuals": rep.as_dict(),
        "bound_20h2": 20.0 * h * h,
        "within_20h2": bool(rep.max() <= 20.0 * h * h),
    }
    return payload, {}, EXIT_OK


def cmd_march(a):
    u0 = _vector_file(a.u)
    if u0.grid.dims[2] != 1:
        raise UsageError("the initial slice must have dims (n1, n2, 1)")
    sl = CauchySlice.from_field(u0)
    res = march(sl, a.depth, a.steps, a.filter_frac, u3_min=a.u3_min, mode=a.mode)
    fields = {"u": res.field}
    payload = {
        "command": "march",
        "u": {"file": os.path.basename(a.u)},
        "depth": a.depth,
        "steps": a.steps,
        "filter_frac": a.filter_frac,
        "u3_min": a.u3_min,
        "mode": res.mode,
        "factor": res.factor,
        "grid": res.field.grid.descriptor(),
    }
    if res.mode != "zero":
        f = recover_f(res.field, a.u3_min, spectral=True)
        rep = verify_beltrami(res.field, f, order=4)
        fields["f"] = f
        payload["f_range"] = [float(np.min(f.values)), float(np.max(f.values))]
        payload["residuals"] = rep.as_dict()
    return payload, fields, EXIT_OK


def _params(items):
    out = {}
    for item in items or ():
        key, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"--param expects key=value, got {item!r}")
        out[key.strip()] = val.strip()
    return out


ORACLES = {
    "abc": (ABC, {"A": float, "B": float, "C": float, "c": float}),
    "harmonic": (HarmonicGradient, {"F": str}),
    "planar_cr": (PlanarCR, {"phi": str, "v": str, "w": str, "z0": float}),
    "cylinder": (Cylinder, {"phi": str, "u1_0": float, "u2_0": float, "r0": float}),
    "lundquist": (Lundquist, {"c": float}),
}


def cmd_oracle(a):
    cls, types = ORACLES[a.kind]
    params = _params(a.param)
    unknown = set(params) - set(types)
    if unknown:
        raise UsageError(f"unknown parameters for {a.kind}: {sorted(unknown)}")
    kind = cls(**{k: types[k](v) for k, v in params.items()})
    grid = _grid_from_args(a)
    u, f = materialize(kind, grid)
    rep = verify_beltrami(u, f, order=a.order)
    payload = {
        "command": "oracle",
        "kind": a.kind,
        "params": {k: getattr(kind, k) for k in types},
        "grid": grid.descriptor(),
        "residuals": rep.as_dict(),
    }
    return payload, {"u": u, "f": f}, EXIT_OK


def cmd_ode(a):
    u0 = _floats(a.u0, 2, "--u0")
    sol = cylinder_ode_solve(a.phi, a.r0, u0, a.r1, a.step)
    payload = {
        "command": "ode",
        "phi": to_string(as_expr(a.phi)),
        "r0": a.r0,
        "r1": a.r1,
        "u0": list(u0),
        "step": a.step,
        "nodes": int(sol.r.size),
        "final": {"u1": float(sol.u1[-1]), "u2": float(sol.u2[-1])},
    }
    table = np.column_stack([sol.r, sol.u1, sol.u2])
    return payload, {"_table": table}, EXIT_OK


# ----------------------------------------------------------------------------
# parser

def _add_grid(p):
    g = p.add_argument_group("grid")
    g.add_argument("--grid", help="box 'x0,y0,z0:x1,y1,z1:nx,ny,nz[:coords]'")
    g.add_argument("--origin", help="three numbers")
    g.add_argument("--spacing", help="three numbers")
    g.add_argument("--dims", help="three node counts (1 marks an unused axis)")
    g.add_argument("--coords", default="cartesian", choices=("cartesian", "cylindrical_rz"))


def _add_common(p):
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.add_argument("--config", help="file of 'key = value' lines mirroring the flags")
    p.add_argument("--vtk", action="store_true", help="also write fields.vtk")
    p.add_argument("--no-fields", action="store_true", help="write only the JSON report")


def build_parser():
    parser = argparse.ArgumentParser(prog="beltrami", description="Beltrami field toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = sub.add_parser("classify", help="classify a proportionality factor f")
    p.add_argument("--f", help="expression for f")
    p.add_argument("--f-file", help="BFG1 scalar file for f")
    p.add_argument("--eps", type=float, default=1e-4)
    p.add_argument("--order", type=int, default=4, choices=(2, 4))
    _add_grid(p)
    p.set_defaults(func=cmd_classify)
    subs["classify"] = p

    p = sub.add_parser("frame", help="adapted frame and connection coefficients of f")
    p.add_argument("--f")
    p.add_argument("--f-file")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--umbilic-eps", type=float, default=1e-6)
    p.add_argument("--principal", default="auto", choices=("auto", "yes", "no"))
    p.add_argument("--ordering", default="descending", choices=("descending", "ascending"))
    p.add_argument("--order", type=int, default=4, choices=(2, 4))
    _add_grid(p)
    p.set_defaults(func=cmd_frame)
    subs["frame"] = p

    p = sub.add_parser("construct", help="translation or rotation symmetric field")
    p.add_argument("--symmetry", required=True, choices=("translation", "rotation"))
    p.add_argument("--phi", required=True, help="profile Phi(t)")
    p.add_argument("--bc", help="Dirichlet data as an expression")
    p.add_argument("--bc-file", help="Dirichlet data as a BFG1 scalar file")
    p.add_argument("--newton-tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=50)
    p.add_argument("--damping-floor", type=float, default=2.0**-10)
    p.add_argument("--extrude", type=int, default=5, help="layers along the symmetry direction")
    p.add_argument("--order", type=int, default=4, choices=(2, 4))
    _add_grid(p)
    p.set_defaults(func=cmd_construct)
    subs["construct"] = p

    p = sub.add_parser("verify", help="residuals of curl u = f u, div u = 0")
    p.add_argument("--u", required=True, help="BFG1 vector file")
    p.add_argument("--f", help="expression for f")
    p.add_argument("--f-file", help="BFG1 scalar file")
    p.add_argument("--order", type=int, default=2, choices=(2, 4))
    p.set_defaults(func=cmd_verify)
    subs["verify"] = p

    p = sub.add_parser("march", help="Cauchy march from a periodic slice")
    p.add_argument("--u", required=True, help="BFG1 vector file with dims (n1, n2, 1)")
    p.add_argument("--depth", type=float, default=0.2)
    p.add_argument("--steps", type=int, default=40)
    p.add_argument("--filter-frac", type=float, default=2.0 / 3.0)
    p.add_argument("--u3-min", type=float, default=1e-6)
    p.add_argument("--mode", default="auto", choices=("auto", "general", "constant"))
    p.set_defaults(func=cmd_march)
    subs["march"] = p

    p = sub.add_parser("oracle", help="sample a closed-form Beltrami field")
    p.add_argument("--kind", required=True, choices=sorted(ORACLES))
    p.add_argument("--param", action="append", help="key=value, repeatable")
    p.add_argument("--order", type=int, default=2, choices=(2, 4))
    _add_grid(p)
    p.set_defaults(func=cmd_oracle)
    subs["oracle"] = p

    p = sub.add_parser("ode", help="integrate the cylinder ODE")
    p.add_argument("--phi", required=True, help="phi(r)")
    p.add_argument("--r0", type=float, default=1.0)
    p.add_argument("--u0", default="0,1", help="initial (u1, u2)")
    p.add_argument("--r1", type=float, required=True)
    p.add_argument("--step", type=float, default=1e-3)
    p.set_defaults(func=cmd_ode)
    subs["ode"] = p

    for p in subs.values():
        _add_common(p)
    return parser, subs


def read_config(path):
    """``key = value`` lines; blank lines and ``#`` comments are skipped."""
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{n}: expected 'key = value'")
        out[key.strip().lstrip("-").replace("-", "_")] = val.strip()
    return out


def _apply_config(parser, sub, argv, ns):
    cfg = read_config(ns.config)
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, val in cfg.items():
        act = actions.get(key)
        if act is None or key in ("config", "help", "func"):
            raise UsageError(f"unknown config key {key!r}")
        if isinstance(act, argparse._StoreTrueAction):
            low = val.lower()
            if low not in ("true", "false", "yes", "no", "1", "0"):
                raise UsageError(f"config key {key!r} expects a boolean")
            defaults[key] = low in ("true", "yes", "1")
        elif isinstance(act, argparse._AppendAction):
            defaults[key] = [v.strip() for v in val.split(";") if v.strip()]
        else:
            if act.choices is not None and act.type is None and val not in act.choices:
                raise UsageError(f"config key {key!r}: {val!r} not in {sorted(act.choices)}")
            defaults[key] = val
    sub.set_defaults(**defaults)
    # string defaults pass through the argument's type; flags still win
    return parser.parse_args(argv)


def _threads():
    val = os.environ.get("BELTRAMI_THREADS")
    if not val:
        return nullcontext()
    try:
        n = int(val)
    except ValueError:
        raise UsageError(f"BELTRAMI_THREADS must be a positive integer, got {val!r}") from None
    if n < 1:
        raise UsageError(f"BELTRAMI_THREADS must be a positive integer, got {val!r}")
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def _write_outputs(out, payload, fields, vtk, no_fields):
    out.mkdir(parents=True, exist_ok=True)
    table = fields.pop("_table", None)
    if table is not None:
        np.savetxt(out / "ode.csv", table, delimiter=",", header="r,u1,u2", comments="", fmt="%.17g")
    if not no_fields:
        for name, fld in fields.items():
            write_bfg1(out / f"{name}.bfg1", fld)
    if vtk and fields:
        grids = {}
        for name, fld in fields.items():
            grids.setdefault(fld.grid, {})[name] = fld
        for i, group in enumerate(grids.values()):
            write_vtk(out / ("fields.vtk" if i == 0 else f"fields_{i}.vtk"), group)
    text = report_json(payload)
    (out / "report.json").write_text(text)
    return text


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subs = build_parser()
    ns = parser.parse_args(argv)
    out = Path(ns.out)
    payload = {"command": ns.command}
    fields = {}
    try:
        if ns.config:
            ns = _apply_config(parser, subs[ns.command], argv, ns)
            out = Path(ns.out)
        with _threads():
            payload, fields, status = ns.func(ns)
        payload["status"] = "ok" if status == EXIT_OK else "indeterminate"
    except UsageError as exc:
        payload.update(status="error", error={"type": "UsageError", "message": str(exc)})
        status = EXIT_INPUT
    except NUMERICAL_ERRORS as exc:
        payload.update(status="error", error=_describe(exc))
        status = EXIT_NUMERICAL
    except INPUT_ERRORS as exc:
        payload.update(status="error", error=_describe(exc))
        status = EXIT_INPUT
    try:
        text = _write_outputs(out, payload, fields, getattr(ns, "vtk", False), getattr(ns, "no_fields", False))
    except OSError as exc:
        print(f"beltrami: cannot write to {out}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(text)
    if status in (EXIT_INPUT, EXIT_NUMERICAL):
        print(f"beltrami: {payload['error']['type']}: {payload['error']['message']}", file=sys.stderr)
    return status


def _describe(exc):
    msg = exc.args[0] if exc.args else str(exc)
    d = {"type": type(exc).__name__, "message": str(msg)}
    if isinstance(exc, E.NewtonDiverged):
        d["history"] = list(exc.history)
    if isinstance(exc, E.ParseError):
        d["offset"] = exc.offset
        d["expected"] = sorted(exc.expected)
    return d


if __name__ == "__main__":
    sys.exit(main())
