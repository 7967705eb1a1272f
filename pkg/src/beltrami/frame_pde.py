"""The first-order system for u = u1 e1 + u2 e2 in an adapted frame.

Two of the four equations (R1, R2) are tangential constraints on each level
surface; the other two (R3, R4) are transport equations along e3.  The
evolution routine integrates R3 = R4 = 0 along normal lines and then
measures how far R1, R2 drift from zero.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import binary_erosion, generate_binary_structure

from .errors import DomainError, IncompatibleInitialData, StepOutOfDomain
from .expr import as_expr
from .grid import ScalarFieldGrid, VectorFieldGrid, directional_derivative
from .ode import rk4_step


@dataclass(frozen=True, eq=False)
class TangentialField:
    """Components of u along e1 and e2 (the e3 component is zero)."""

    u1: ScalarFieldGrid
    u2: ScalarFieldGrid

    @property
    def grid(self):
        return self.u1.grid

    def vector(self, frame) -> VectorFieldGrid:
        v = self.u1.values * frame.e1.values + self.u2.values * frame.e2.values
        return VectorFieldGrid(self.grid, v)

    def scaled(self, a):
        return TangentialField(self.u1 * a, self.u2 * a)

    def __add__(self, other):
        return TangentialField(self.u1 + other.u1, self.u2 + other.u2)


def system_residual(tf: TangentialField, inv, f: ScalarFieldGrid, order=None):
    """Residuals (R1, R2, R3, R4) of the frame system at every node."""
    order = inv.order if order is None else order
    e1, e2, e3 = inv.frame.vectors()
    u1, u2 = tf.u1.values, tf.u2.values

    def d(F, e):
        return directional_derivative(F, e, order).values

    k1, k2, k3 = inv.k1.values, inv.k2.values, inv.k3.values
    g1, g2 = inv.g1.values, inv.g2.values
    h11, h22 = inv.h11.values, inv.h22.values
    fv = f.values
    r1 = d(tf.u2, e1) - d(tf.u1, e2) - k1 * u1 - k2 * u2
    r2 = d(tf.u1, e1) + d(tf.u2, e2) - (k2 - g1) * u1 + (k1 + g2) * u2
    r3 = d(tf.u1, e3) - h11 * u1 - (fv - k3) * u2
    r4 = d(tf.u2, e3) - (k3 - fv) * u1 - h22 * u2
    g = f.grid
    return tuple(ScalarFieldGrid(g, r) for r in (r1, r2, r3, r4))


# ----------------------------------------------------------------------------
# level-surface evolution

class _Sampler:
    """Trilinear interpolation of several node arrays at once.

    Points outside the grid give NaN rows.  Unused axes are ignored.
    """

    def __init__(self, grid, arrays, margin=1.0):
        self.used = [i for i in range(3) if grid.used(i)]
        self.o = np.array([grid.origin[i] for i in self.used])
        self.h = np.array([grid.spacing[i] for i in self.used])
        self.n = np.array([grid.dims[i] for i in self.used])
        self.margin = margin
        shp = tuple(grid.dims[i] for i in self.used)
        self.V = np.stack([np.asarray(a, dtype=float).reshape(shp) for a in arrays], axis=-1)
        self.flat = np.ascontiguousarray(self.V.reshape(-1, len(arrays)).T)
        self.strides = np.array([int(np.prod(shp[a + 1:])) for a in range(len(shp))], dtype=np.int64)

    def __call__(self, pts):
        q = (pts[:, self.used] - self.o) / self.h
        bad = ~np.all(np.isfinite(q), axis=1)
        q = np.where(np.isfinite(q), q, 0.0)
        # within ``margin`` cells of the boundary the edge cell is extended linearly
        out = np.any((q < -self.margin) | (q > self.n - 1 + self.margin), axis=1) | bad
        i = np.clip(np.floor(q).astype(int), 0, self.n - 2)
        t = q - i
        base = i @ self.strides
        acc = np.zeros((self.flat.shape[0], len(q)))
        for corner in itertools.product((0, 1), repeat=len(self.used)):
            w = np.ones(len(q))
            off = 0
            for a, c in enumerate(corner):
                w *= t[:, a] if c else 1.0 - t[:, a]
                off += c * int(self.strides[a])
            acc += w * np.take(self.flat, base + off, axis=1)
        acc = acc.T
        acc[out] = np.nan
        return acc


@dataclass(frozen=True, eq=False)
class NormalTransport:
    """Normal lines traced from every node back to a starting level set.

    For node ``n`` in the region, ``start[n]`` is where its normal line meets
    the level ``f = level`` and ``transfer[n]`` is the 2x2 matrix with
    ``u(start) = transfer @ u(node)`` for solutions of R3 = R4 = 0.
    """

    grid: object
    level: float
    mask: np.ndarray
    arc_length: np.ndarray
    index: np.ndarray
    start: np.ndarray
    transfer: np.ndarray
    step: float

    def apply(self, initial):
        """Evolved (u1, u2) node arrays for the given initial data."""
        a1, a2 = _initial_values(initial, self.grid, self.start)
        if not (np.all(np.isfinite(a1)) and np.all(np.isfinite(a2))):
            raise StepOutOfDomain("initial data could not be evaluated on the starting surface")
        rhs = np.stack([a1, a2], axis=1)[:, :, None]
        sol = np.linalg.solve(self.transfer, rhs)[:, :, 0]
        n = int(np.prod(self.grid.dims))
        U1 = np.zeros(n)
        U2 = np.zeros(n)
        U1[self.index] = sol[:, 0]
        U2[self.index] = sol[:, 1]
        g = self.grid
        return TangentialField(ScalarFieldGrid(g, U1.reshape(g.dims)), ScalarFieldGrid(g, U2.reshape(g.dims)))


def trace_normal_lines(inv, f: ScalarFieldGrid, arc_range: float, step=None, level=None) -> NormalTransport:
    """Trace every node backwards along -e3 to the level ``f = level``.

    Position and transfer matrix are advanced together with RK4 at a fixed
    arc-length step; the crossing inside the final step is located by a
    few secant iterations on the partial step length.
    """
    grid = f.grid
    hmin = grid.min_spacing()
    step = 0.5 * hmin if step is None else float(step)
    if not np.isfinite(step) or step <= 0:
        raise StepOutOfDomain(f"step must be positive, got {step}")
    if not np.isfinite(arc_range) or arc_range <= 0:
        raise StepOutOfDomain(f"arc_range must be positive, got {arc_range}")
    f0 = float(np.min(f.values)) if level is None else float(level)
    e3v = inv.frame.e3.values
    coef = _Sampler(grid, [f.values, e3v[0], e3v[1], e3v[2], inv.h11.values, inv.h22.values, inv.k3.values])
    cyl = grid.cylindrical

    def back(t, y):
        x = y[:, :3]
        c = coef(x)
        v = -c[:, 1:4]
        if cyl:
            v[:, 1] /= x[:, 0]
        fv, h11, h22, k3 = c[:, 0], c[:, 4], c[:, 5], c[:, 6]
        m11, m12, m21, m22 = h11, fv - k3, k3 - fv, h22
        T11, T12, T21, T22 = y[:, 3], y[:, 4], y[:, 5], y[:, 6]
        # dT/dsigma = -M T
        dT = np.column_stack([
            -(m11 * T11 + m12 * T21),
            -(m11 * T12 + m12 * T22),
            -(m21 * T11 + m22 * T21),
            -(m21 * T12 + m22 * T22),
        ])
        return np.column_stack([v, dT])

    A, B, Cc = grid.mesh()
    pts = np.stack([A.ravel(), B.ravel(), Cc.ravel()], axis=1)
    fn = f.values.ravel()
    n = len(fn)
    ftol = 1e-12 * max(float(np.max(np.abs(fn))), 1.0)
    eye = np.tile([1.0, 0.0, 0.0, 1.0], (n, 1))
    cur = np.column_stack([pts, eye])
    fin = cur.copy()
    s = np.zeros(n)
    s_star = np.zeros(n)
    found = np.abs(fn - f0) <= ftol
    lost = fn < f0 - ftol
    fcur = fn.copy()

    for _ in range(int(np.ceil(arc_range / step))):
        act = np.flatnonzero(~(found | lost))
        if act.size == 0:
            break
        y = cur[act]
        yn = rk4_step(back, 0.0, y, step)
        fnew = coef(yn[:, :3])[:, 0]
        bad = ~np.all(np.isfinite(yn), axis=1) | ~np.isfinite(fnew)
        crossed = ~bad & (fnew <= f0)
        if np.any(crossed):
            ci = act[crossed]
            y0 = y[crossed]
            f_lo, f_hi = fcur[ci], fnew[crossed]
            lo, hi = np.zeros(ci.size), np.full(ci.size, step)
            for _ in range(4):
                den = f_lo - f_hi
                th = np.clip((f_lo - f0) / np.where(den != 0, den, 1.0), 0.0, 1.0)
                mid = lo + th * (hi - lo)
                fm = coef(rk4_step(back, 0.0, y0, mid[:, None])[:, :3])[:, 0]
                above = np.isfinite(fm) & (fm > f0)
                lo, f_lo = np.where(above, mid, lo), np.where(above, fm, f_lo)
                hi, f_hi = np.where(above, hi, mid), np.where(above, f_hi, fm)
            den = f_lo - f_hi
            th = np.clip((f_lo - f0) / np.where(den != 0, den, 1.0), 0.0, 1.0)
            sfin = lo + th * (hi - lo)
            fin[ci] = rk4_step(back, 0.0, y0, sfin[:, None])
            s_star[ci] = s[ci] + sfin
            found[ci] = True
        lost[act[bad]] = True
        adv = act[~bad & ~crossed]
        keep = ~bad & ~crossed
        cur[adv] = yn[keep]
        fcur[adv] = fnew[keep]
        s[adv] += step

    fin[np.abs(fn - f0) <= ftol] = np.column_stack([pts, eye])[np.abs(fn - f0) <= ftol]
    region = found & ~lost & (s_star <= arc_range) & np.all(np.isfinite(fin), axis=1)
    if not np.any(region):
        raise StepOutOfDomain(f"no node reaches the level f = {f0:g} within arc length {arc_range:g}")
    idx = np.flatnonzero(region)
    T = fin[idx, 3:].reshape(-1, 2, 2)
    return NormalTransport(
        grid, f0, region.reshape(grid.dims), s_star.reshape(grid.dims), idx, fin[idx, :3], T, step
    )


@dataclass(frozen=True, eq=False)
class EvolutionResult:
    field: TangentialField
    mask: np.ndarray
    arc_length: np.ndarray
    compatibility_residual: float
    initial_residual: float
    compatible: bool
    transport: NormalTransport | None = None

    @property
    def amplification(self):
        if self.initial_residual == 0:
            return np.inf if self.compatibility_residual > 0 else 1.0
        return self.compatibility_residual / self.initial_residual


def _initial_values(initial, grid, pts):
    if isinstance(initial, TangentialField):
        s = _Sampler(grid, [initial.u1.values, initial.u2.values])
        v = s(pts)
        return v[:, 0], v[:, 1]
    a, b = initial(pts[:, 0], pts[:, 1], pts[:, 2])
    n = len(pts)
    return np.broadcast_to(np.asarray(a, float), (n,)).copy(), np.broadcast_to(np.asarray(b, float), (n,)).copy()


def _sampled_initial(initial, grid):
    if isinstance(initial, TangentialField):
        return initial
    a, b, c = grid.mesh()
    u1, u2 = initial(a, b, c)
    return TangentialField(
        ScalarFieldGrid(grid, np.broadcast_to(np.asarray(u1, float), grid.dims)),
        ScalarFieldGrid(grid, np.broadcast_to(np.asarray(u2, float), grid.dims)),
    )


def _sup_on(mask, *fields):
    if not np.any(mask):
        return 0.0
    return float(max(np.max(np.abs(F.values[mask])) for F in fields))


def evolve_level_surfaces(
    initial,
    inv,
    f: ScalarFieldGrid,
    arc_range: float,
    step: float | None = None,
    *,
    level: float | None = None,
    tol: float | None = None,
    order=None,
    C: float = 20.0,
    growth: float = 10.0,
    transport: NormalTransport | None = None,
) -> EvolutionResult:
    """Transport tangential data from the level set ``f = level`` along e3.

    The transport equations R3 = R4 = 0 are integrated along the normal
    lines (see ``trace_normal_lines``); the compatibility residual is the
    sup of |R1|, |R2| over nodes whose whole stencil lies in the evolved
    region.

    Args:
        initial: ``TangentialField`` sampled on the grid (interpolated onto
            the starting surface) or a callable ``(a, b, c) -> (u1, u2)`` in
            grid coordinates.
        inv: invariants of the frame the data is expressed in.
        f: the proportionality factor whose level sets are followed.
        arc_range: maximal arc length along normal lines.
        step: RK4 step; defaults to half the smallest grid spacing.
        level: starting level, default ``min f``.
        tol: precondition bound on R1, R2 of the initial data on the
            starting surface (default ``C h^2``).
        transport: a precomputed ``trace_normal_lines`` result to reuse.
    """
    grid = f.grid
    order = inv.order if order is None else order
    hmin = grid.min_spacing()
    tol = C * hmin**2 if tol is None else tol
    if transport is None:
        transport = trace_normal_lines(inv, f, arc_range, step, level)

    init_field = _sampled_initial(initial, grid)
    Q1, Q2, _, _ = system_residual(init_field, inv, f, order)
    start_nodes = transport.mask & (transport.arc_length <= 0.5 * hmin)
    init_res = _sup_on(start_nodes, Q1, Q2)
    if init_res > tol:
        raise IncompatibleInitialData(
            f"initial data violates the tangential constraints: residual {init_res:.3g} > tol {tol:.3g}"
        )

    evolved = transport.apply(initial)
    width = 2 if order == 4 else 1
    inner = binary_erosion(transport.mask, structure=generate_binary_structure(3, 1), iterations=width, border_value=1)
    R1, R2, _, _ = system_residual(evolved, inv, f, order)
    comp = _sup_on(inner, R1, R2)
    incompatible = comp >= growth * init_res and comp > 10.0 * C * hmin**2
    return EvolutionResult(evolved, transport.mask, transport.arc_length, comp, init_res, not incompatible, transport)


# ----------------------------------------------------------------------------
# cylinder ODE

@dataclass(frozen=True)
class CylinderSolution:
    r: np.ndarray
    u1: np.ndarray
    u2: np.ndarray


def _phi_callable(phi):
    if callable(phi) and not hasattr(phi, "evaluate"):
        return phi
    e = as_expr(phi)
    extra = e.variables() - {"r"}
    if extra:
        raise ValueError(f"phi may only depend on r, found {sorted(extra)}")
    return lambda r: e.evaluate({"r": r})


def _cyl_rhs(phi):
    def rhs(r, y):
        p = phi(r)
        u1, u2 = y[0], y[1]
        return np.stack([-u1 / r + p * u2, -p * u1])
    return rhs


def cylinder_ode_solve(phi, r0: float, u0, r1: float, step: float = 1e-3) -> CylinderSolution:
    """RK4 solution of u1' = -u1/r + phi u2, u2' = -phi u1 from r0 to r1.

    The step is shrunk slightly so that the last node lands on r1.
    """
    if r0 <= 0 or r1 <= 0:
        raise DomainError("the cylinder ODE is singular at r = 0; keep r0, r1 > 0")
    if step <= 0:
        raise ValueError("step must be positive")
    fn = _phi_callable(phi)
    n = max(1, int(np.ceil(abs(r1 - r0) / step - 1e-12)))
    dr = (r1 - r0) / n
    rhs = _cyl_rhs(fn)
    rs = r0 + dr * np.arange(n + 1)
    rs[-1] = r1
    out = np.empty((2, n + 1))
    y = np.array([float(u0[0]), float(u0[1])])
    out[:, 0] = y
    for i in range(n):
        y = rk4_step(rhs, rs[i], y, dr)
        out[:, i + 1] = y
    return CylinderSolution(rs, out[0], out[1])


def cylinder_ode_at(phi, r0: float, u0, radii, step: float = 1e-3):
    """Solution values at arbitrary radii, integrating all of them at once."""
    radii = np.asarray(radii, dtype=float)
    if r0 <= 0 or np.any(radii <= 0):
        raise DomainError("the cylinder ODE is singular at r = 0; keep all radii positive")
    fn = _phi_callable(phi)
    flat = radii.ravel()
    n = max(1, int(np.ceil(np.max(np.abs(flat - r0)) / step - 1e-12)))
    dr = (flat - r0) / n
    y = np.empty((2, flat.size))
    y[0], y[1] = u0[0], u0[1]
    rhs = _cyl_rhs(fn)
    r = np.full(flat.size, float(r0))
    for _ in range(n):
        y = rk4_step(rhs, r, y, dr)
        r = r + dr
    return y[0].reshape(radii.shape), y[1].reshape(radii.shape)
