"""Closed-form Beltrami fields used as test oracles.

Kinds:

* ``HarmonicGradient(F)``: u = grad F with F harmonic, f = 0.
* ``ABC(A, B, C, c)``: the Arnold-Beltrami-Childress field, f = c.
* ``PlanarCR(phi, v, w)``: u = (v cos P + w sin P, -v sin P + w cos P, 0)
  with P' = phi(z), P(z0) = 0, and (v, w) solving v_x + w_y = 0,
  w_x - v_y = 0; f = phi(z).
* ``Cylinder(phi, u1_0, u2_0, r0)``: u = u1(r) e_theta + u2(r) e_z from the
  cylinder ODE, f = phi(r).
* ``Lundquist(c)``: u = J1(c r) e_theta + J0(c r) e_z, f = c.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import CRViolation, NotHarmonic
from .expr import as_expr, differentiate
from .frame_pde import cylinder_ode_at
from .grid import Grid, ScalarFieldGrid, VectorFieldGrid

BESSEL_SWITCH = 12.0


# ----------------------------------------------------------------------------
# Bessel functions of the first kind, orders 0 and 1

def _bessel_series(x, n):
    # long double accumulation keeps the alternating series accurate to ~1e-15
    h = 0.5 * np.asarray(x, dtype=np.longdouble)
    term = h if n == 1 else np.ones_like(h)
    total = term.copy()
    for k in range(1, 60):
        term = -term * h * h / (k * (k + n))
        total = total + term
    return total.astype(float)


def _bessel_asymptotic(x, n):
    """Hankel expansion, truncated at its smallest term for each x."""
    x = np.asarray(x, dtype=float)
    mu = 4.0 * n * n
    P = np.zeros_like(x)
    Q = np.zeros_like(x)
    live = np.ones(x.shape, dtype=bool)
    prev = np.full(x.shape, np.inf)
    a = 1.0
    for k in range(80):
        tk = a / x**k
        live &= np.abs(tk) <= prev
        prev = np.abs(tk)
        sgn = -1.0 if (k // 2) % 2 else 1.0
        if k % 2 == 0:
            P += np.where(live, sgn * tk, 0.0)
        else:
            Q += np.where(live, sgn * tk, 0.0)
        a = a * (mu - (2 * k + 1) ** 2) / ((k + 1) * 8.0)
    chi = x - (0.5 * n + 0.25) * np.pi
    return np.sqrt(2.0 / (np.pi * x)) * (P * np.cos(chi) - Q * np.sin(chi))


def _bessel(x, n):
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = np.empty_like(ax)
    small = ax <= BESSEL_SWITCH
    if np.any(small):
        out[small] = _bessel_series(ax[small], n)
    if np.any(~small):
        out[~small] = _bessel_asymptotic(ax[~small], n)
    if n == 1:
        out = np.where(x < 0, -out, out)
    return out if out.ndim else float(out)


def bessel_j0(x):
    """J0 by power series for |x| <= 12 and the Hankel expansion beyond."""
    return _bessel(x, 0)


def bessel_j1(x):
    """J1, odd extension of the same scheme as ``bessel_j0``."""
    return _bessel(x, 1)


# ----------------------------------------------------------------------------
# oracle kinds

@dataclass(frozen=True)
class HarmonicGradient:
    F: object = "exp(x)*cos(y)"


@dataclass(frozen=True)
class ABC:
    A: float = 1.0
    B: float = 1.0
    C: float = 1.0
    c: float = 1.0


@dataclass(frozen=True)
class PlanarCR:
    phi: object = "1"
    v: object = "x"
    w: object = "-y"
    z0: float = 0.0


@dataclass(frozen=True)
class Cylinder:
    phi: object = "1"
    u1_0: float = 0.0
    u2_0: float = 1.0
    r0: float = 1.0


@dataclass(frozen=True)
class Lundquist:
    c: float = 1.0


@dataclass(frozen=True)
class OracleSpec:
    kind: object
    grid: Grid


def _grid_components(grid, ux, uy, uz):
    """Cartesian components to the grid's component basis."""
    if not grid.cylindrical:
        return np.stack([ux, uy, uz])
    th = grid.mesh()[1]
    c, s = np.cos(th), np.sin(th)
    return np.stack([c * ux + s * uy, -s * ux + c * uy, uz])


def _azimuthal(grid, a_theta, a_z):
    """a_theta e_theta + a_z e_z in grid components."""
    if grid.cylindrical:
        return np.stack([np.zeros_like(a_z), a_theta, a_z])
    X, Y, _ = grid.cartesian_mesh()
    r = np.hypot(X, Y)
    safe = np.where(r > 0, r, 1.0)
    ex = np.where(r > 0, -Y / safe, 0.0)
    ey = np.where(r > 0, X / safe, 0.0)
    return np.stack([a_theta * ex, a_theta * ey, a_z])


def _cartesian_bindings(grid):
    X, Y, Z = grid.cartesian_mesh()
    return {"x": X, "y": Y, "z": Z}


def _eval(e, b, shape):
    return np.broadcast_to(np.asarray(as_expr(e).evaluate(b), dtype=float), shape)


def _harmonic(kind, grid):
    F = as_expr(kind.F)
    bad = F.variables() - {"x", "y", "z"}
    if bad:
        raise ValueError(f"F must be written in x, y, z; found {sorted(bad)}")
    b = _cartesian_bindings(grid)
    shape = grid.dims
    grads = [differentiate(F, v) for v in ("x", "y", "z")]
    lap = sum(_eval(differentiate(gv, v), b, shape) for gv, v in zip(grads, ("x", "y", "z")))
    u = [_eval(gv, b, shape) for gv in grads]
    scale = max(1.0, max(float(np.max(np.abs(c))) for c in u))
    if np.max(np.abs(lap)) > 1e-9 * scale:
        raise NotHarmonic(f"Laplacian of F reaches {np.max(np.abs(lap)):.3g} on the grid")
    return _grid_components(grid, *u), np.zeros(shape)


def _abc(kind, grid):
    X, Y, Z = grid.cartesian_mesh()
    A, B, C, c = kind.A, kind.B, kind.C, kind.c
    ux = A * np.sin(c * Z) + C * np.cos(c * Y)
    uy = B * np.sin(c * X) + A * np.cos(c * Z)
    uz = C * np.sin(c * Y) + B * np.cos(c * X)
    return _grid_components(grid, ux, uy, uz), np.full(grid.dims, float(c))


def _planar_cr(kind, grid, tol=1e-9):
    phi, v, w = as_expr(kind.phi), as_expr(kind.v), as_expr(kind.w)
    if phi.variables() - {"z"}:
        raise ValueError("phi must depend on z only")
    if (v.variables() | w.variables()) - {"x", "y"}:
        raise ValueError("v and w must depend on x and y only")
    b = _cartesian_bindings(grid)
    shape = grid.dims
    vx, vy = (_eval(differentiate(v, s), b, shape) for s in ("x", "y"))
    wx, wy = (_eval(differentiate(w, s), b, shape) for s in ("x", "y"))
    scale = max(1.0, *(float(np.max(np.abs(a))) for a in (vx, vy, wx, wy)))
    defect = max(float(np.max(np.abs(vx + wy))), float(np.max(np.abs(wx - vy))))
    if defect > tol * scale:
        raise CRViolation(f"(v, w) violates v_x + w_y = 0, w_x - v_y = 0 by {defect:.3g}")
    Z = b["z"]
    zs, inv = np.unique(Z, return_inverse=True)
    fz = lambda s: phi.evaluate({"z": s})
    P = np.array([quad(fz, kind.z0, s, epsabs=1e-14, epsrel=1e-13)[0] for s in zs])[inv].reshape(shape)
    V, W = _eval(v, b, shape), _eval(w, b, shape)
    cp, sp = np.cos(P), np.sin(P)
    u = _grid_components(grid, V * cp + W * sp, -V * sp + W * cp, np.zeros(shape))
    return u, _eval(phi, b, shape).copy()


def _radii(grid):
    X, Y, _ = grid.cartesian_mesh()
    return grid.mesh()[0] if grid.cylindrical else np.hypot(X, Y)


def _cylinder(kind, grid, step=1e-3):
    phi = as_expr(kind.phi)
    if phi.variables() - {"r"}:
        raise ValueError("phi must depend on r only")
    r = _radii(grid)
    rs, inv = np.unique(r, return_inverse=True)
    a, b = cylinder_ode_at(phi, kind.r0, (kind.u1_0, kind.u2_0), rs, step)
    u1 = a[inv].reshape(grid.dims)
    u2 = b[inv].reshape(grid.dims)
    f = np.broadcast_to(np.asarray(phi.evaluate({"r": r}), dtype=float), grid.dims).copy()
    return _azimuthal(grid, u1, u2), f


def _lundquist(kind, grid):
    r = _radii(grid)
    c = float(kind.c)
    return _azimuthal(grid, bessel_j1(c * r), bessel_j0(c * r)), np.full(grid.dims, c)


_BUILDERS = {
    HarmonicGradient: _harmonic,
    ABC: _abc,
    PlanarCR: _planar_cr,
    Cylinder: _cylinder,
    Lundquist: _lundquist,
}


def materialize(spec, grid: Grid | None = None):
    """Sample an oracle on a grid, returning ``(u, f)``.

    Accepts an ``OracleSpec`` or a kind plus a grid.
    """
    if isinstance(spec, OracleSpec):
        kind, grid = spec.kind, spec.grid
    else:
        kind = spec
    if grid is None:
        raise ValueError("a grid is required")
    try:
        build = _BUILDERS[type(kind)]
    except KeyError:
        raise TypeError(f"unknown oracle kind {type(kind).__name__}") from None
    u, f = build(kind, grid)
    return VectorFieldGrid(grid, u), ScalarFieldGrid(grid, f)
