"""Beltrami fields with a translation or rotation symmetry.

Translation (fields independent of z)::

    Laplacian H = -Phi'(H) Phi(H),   u = (-H_y, H_x, -Phi(H)),   f = Phi'(H)

Rotation (fields independent of theta, cylindrical components)::

    d_r(H_r / r) + d_z(H_z / r) = -Phi'(H) Phi(H) / r
    u = (-H_z / r, Phi(H) / r, H_r / r),   f = Phi'(H)

Both elliptic problems are solved with Dirichlet data by damped Newton on a
five-point stencil; the rotation operator is discretized in conservative
form with 1/r evaluated at the half nodes.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .errors import GridError, NewtonDiverged
from .expr import Expr, as_expr, binop, differentiate
from .grid import (
    Coords,
    Grid,
    ScalarFieldGrid,
    VectorFieldGrid,
    curl,
    diff,
    divergence,
    gradient,
    jacobian_sup,
)


@dataclass(frozen=True)
class NewtonOptions:
    max_iter: int = 50
    tol: float = 1e-10
    damping_floor: float = 2.0**-10


@dataclass(frozen=True, eq=False)
class FluxSolve:
    """Converged flux function with the profile that produced it."""

    H: ScalarFieldGrid
    Phi: Expr
    PhiPrime: Expr
    newton: NewtonOptions
    bc: np.ndarray
    symmetry: str
    history: list = field(default_factory=list)

    @property
    def residual(self):
        return self.history[-1] if self.history else 0.0

    @property
    def iterations(self):
        return max(len(self.history) - 1, 0)


def _plane_axes(grid, symmetry):
    if symmetry == "translation":
        if grid.cylindrical:
            raise GridError("translation solves need a Cartesian grid")
        if grid.dims[2] != 1 or not (grid.used(0) and grid.used(1)):
            raise GridError("translation grids are (x, y) planes: dims (nx, ny, 1)")
        return 0, 1
    if not grid.cylindrical:
        raise GridError("rotation solves need a cylindrical_rz grid")
    if grid.dims[1] != 1 or not (grid.used(0) and grid.used(2)):
        raise GridError("rotation grids are (r, z) planes: dims (nr, 1, nz)")
    return 0, 2


def _boundary_values(bc, grid):
    if isinstance(bc, ScalarFieldGrid):
        vals = bc.values
    elif isinstance(bc, np.ndarray):
        vals = bc
    elif callable(bc) and not isinstance(bc, Expr):
        a, b, c = grid.mesh()
        vals = bc(a, b, c)
    else:
        vals = as_expr(bc).evaluate(grid.bindings())
    vals = np.broadcast_to(np.asarray(vals, dtype=float), grid.dims).copy()
    edge = np.ones(grid.dims, dtype=bool)
    sl = [slice(1, -1) if n > 1 else slice(None) for n in grid.dims]
    edge[tuple(sl)] = False
    if not np.all(np.isfinite(vals[edge])):
        raise GridError("Dirichlet data must be finite")
    return vals


class _Stencil:
    """Five-point operator on the interior of a 2D plane."""

    def __init__(self, grid, symmetry):
        a, b = _plane_axes(grid, symmetry)
        self.shape = (grid.dims[a], grid.dims[b])
        ha, hb = grid.spacing[a], grid.spacing[b]
        m1, m2 = self.shape[0] - 2, self.shape[1] - 2
        if symmetry == "translation":
            cw = ce = np.full((m1, m2), 1.0 / ha**2)
            cs = cn = np.full((m1, m2), 1.0 / hb**2)
            w = np.ones((m1, m2))
        else:
            r = grid.axis(0)[1:-1][:, None] * np.ones((1, m2))
            cw = 1.0 / (ha**2 * (r - 0.5 * ha))
            ce = 1.0 / (ha**2 * (r + 0.5 * ha))
            cs = cn = 1.0 / (hb**2 * r)
            w = 1.0 / r
        self.cw, self.ce, self.cs, self.cn = cw, ce, cs, cn
        self.cc = -(cw + ce + cs + cn)
        self.w = w
        n = m1 * m2
        # interior unknowns are numbered row-major on (m1, m2)
        south = cs.ravel()[1:].copy()
        south[np.arange(1, n) % m2 == 0] = 0.0
        north = cn.ravel()[:-1].copy()
        north[np.arange(1, n) % m2 == 0] = 0.0
        self.A = sp.diags(
            [cw.ravel()[m2:], south, self.cc.ravel(), north, ce.ravel()[:-m2]],
            [-m2, -1, 0, 1, m2],
            shape=(n, n),
            format="csr",
        )

    def apply(self, H):
        c = H[1:-1, 1:-1]
        return (self.cc * c + self.cw * H[:-2, 1:-1] + self.ce * H[2:, 1:-1]
                + self.cs * H[1:-1, :-2] + self.cn * H[1:-1, 2:])


def _profile(Phi):
    Phi = as_expr(Phi)
    extra = Phi.variables() - {"t"}
    if extra:
        raise ValueError(f"Phi must be a function of t alone, found {sorted(extra)}")
    dPhi = differentiate(Phi, "t")
    S = binop("*", dPhi, Phi)
    dS = differentiate(S, "t")
    return Phi, dPhi, S, dS


def _ev(e, H):
    return np.broadcast_to(np.asarray(e.evaluate({"t": H}), dtype=float), H.shape)


def _solve(Phi, grid, bc, newton, symmetry):
    newton = NewtonOptions() if newton is None else newton
    Phi, dPhi, S, dS = _profile(Phi)
    st = _Stencil(grid, symmetry)
    full = _boundary_values(bc, grid)
    H = full.reshape(st.shape).copy()
    bc_vals = H.copy()

    # harmonic extension of the boundary data as the starting guess
    H[1:-1, 1:-1] = 0.0
    rhs = -st.apply(H).ravel()
    H[1:-1, 1:-1] = spsolve(st.A.tocsc(), rhs).reshape(H[1:-1, 1:-1].shape)

    def residual(Hf):
        return st.apply(Hf) + st.w * _ev(S, Hf[1:-1, 1:-1])

    F = residual(H)
    res = float(np.max(np.abs(F)))
    history = [res]
    for _ in range(newton.max_iter):
        if res <= newton.tol:
            break
        J = st.A + sp.diags((st.w * _ev(dS, H[1:-1, 1:-1])).ravel())
        delta = spsolve(J.tocsc(), -F.ravel()).reshape(F.shape)
        lam = 1.0
        while True:
            trial = H.copy()
            trial[1:-1, 1:-1] += lam * delta
            with np.errstate(all="ignore"):
                Ft = residual(trial)
            rt = float(np.max(np.abs(Ft)))
            if np.isfinite(rt) and rt < res:
                break
            lam *= 0.5
            if lam < newton.damping_floor:
                raise NewtonDiverged(f"residual stalled at {res:.3g} after damping", history)
        H, F, res = trial, Ft, rt
        history.append(res)
    if res > newton.tol:
        raise NewtonDiverged(f"no convergence in {newton.max_iter} iterations (residual {res:.3g})", history)
    Hg = ScalarFieldGrid(grid, H.reshape(grid.dims))
    return FluxSolve(Hg, Phi, dPhi, newton, bc_vals.reshape(grid.dims), symmetry, history)


def solve_translation(Phi, grid2d: Grid, bc, newton: NewtonOptions | None = None) -> FluxSolve:
    """Solve Laplacian H = -Phi'(H) Phi(H) on an (x, y) grid with Dirichlet data.

    ``bc`` may be an expression in x, y, a callable, an array or a scalar
    field on ``grid2d``; only its boundary values are used.
    """
    return _solve(Phi, grid2d, bc, newton, "translation")


def solve_rotation(Phi, grid2d: Grid, bc, newton: NewtonOptions | None = None) -> FluxSolve:
    """Solve the axisymmetric flux equation on an (r, z) grid with r > 0."""
    return _solve(Phi, grid2d, bc, newton, "rotation")


def assemble_translation(fs: FluxSolve, nz: int = 5, hz: float | None = None, order: int = 4):
    """Extrude a translation solve into (u, f) on a 3D Cartesian grid.

    Every z-layer holds the same values, so u is exactly z-independent.
    """
    g = fs.H.grid
    H = fs.H.values[:, :, 0]
    Hx = diff(H, g.spacing[0], 0, order)
    Hy = diff(H, g.spacing[1], 1, order)
    hz = g.spacing[0] if hz is None else hz
    g3 = Grid((g.origin[0], g.origin[1], g.origin[2]), (g.spacing[0], g.spacing[1], hz), (g.dims[0], g.dims[1], nz))
    comps = np.stack([-Hy, Hx, -_ev(fs.Phi, H)])
    u = np.repeat(comps[..., None], nz, axis=3)
    f = np.repeat(_ev(fs.PhiPrime, H)[..., None], nz, axis=2)
    return VectorFieldGrid(g3, u), ScalarFieldGrid(g3, f)


def assemble_rotation(fs: FluxSolve, ntheta: int = 1, htheta: float = 0.1, order: int = 4):
    """(u, f) in cylindrical components; constant along theta."""
    g = fs.H.grid
    H = fs.H.values[:, 0, :]
    r = g.axis(0)[:, None]
    Hr = diff(H, g.spacing[0], 0, order)
    Hz = diff(H, g.spacing[2], 1, order)
    g3 = Grid(g.origin, (g.spacing[0], htheta, g.spacing[2]), (g.dims[0], ntheta, g.dims[2]), Coords.CYLINDRICAL_RZ)
    comps = np.stack([-Hz / r, _ev(fs.Phi, H) / r, Hr / r])
    u = np.repeat(comps[:, :, None, :], ntheta, axis=2)
    f = np.repeat(_ev(fs.PhiPrime, H)[:, None, :], ntheta, axis=1)
    return VectorFieldGrid(g3, u), ScalarFieldGrid(g3, f)


# ----------------------------------------------------------------------------
# verification

@dataclass(frozen=True)
class BeltramiReport:
    curl_res: float
    div_res: float
    ortho_res: float

    def as_dict(self):
        return {"curl_res": self.curl_res, "div_res": self.div_res, "ortho_res": self.ortho_res}

    def max(self):
        return max(self.curl_res, self.div_res, self.ortho_res)


def verify_beltrami(u: VectorFieldGrid, f: ScalarFieldGrid, order: int = 2, eps: float = 1e-300) -> BeltramiReport:
    """Relative residuals of curl u = f u, div u = 0 and u . grad f = 0.

    When grad f is at rounding level (constant f) there is no direction to be
    orthogonal to and ``ortho_res`` is reported as 0.
    """
    if u.grid != f.grid:
        raise GridError("u and f must share a grid")
    cu = curl(u, order)
    r = cu.values - f.values * u.values
    usup = u.sup()
    curl_res = float(np.max(np.sqrt(np.sum(r**2, axis=0)))) / max(usup, eps)
    div_res = divergence(u, order).sup() / max(jacobian_sup(u, order), eps)
    gf = gradient(f, order)
    ortho = np.abs(np.sum(u.values * gf.values, axis=0))
    flat = 1e-12 * max(f.sup(), 1.0) / f.grid.min_spacing()
    if gf.sup() <= flat:
        ortho_res = 0.0
    else:
        ortho_res = float(np.max(ortho)) / max(usup * gf.sup(), eps)
    return BeltramiReport(curl_res, div_res, ortho_res)
