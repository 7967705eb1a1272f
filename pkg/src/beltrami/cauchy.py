"""Cauchy marching of curl u = f u, div u = 0 off a periodic slice.

Eliminating f with f = q := (d1 u2 - d2 u1) / u3 gives the evolution system

    d3 u1 = d1 u3 + u2 q
    d3 u2 = d2 u3 - u1 q
    d3 u3 = -(d1 u1 + d2 u2)

which is marched in x3 with RK4 and FFT derivatives in (x1, x2).  The
problem is ill-posed for large depths, so high modes are cut after every
step.

When the slice already has constant q (a strong Beltrami slice) the
pointwise quotient is replaced by that constant.  Periodic slices of such
fields have zero-mean u3, hence zeros of u3 that the quotient form cannot
cross.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BlowUp, GridError, U3Vanished
from .grid import Grid, ScalarFieldGrid, VectorFieldGrid, diff
from .ode import rk4_step

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class CauchySlice:
    """Initial data on a periodic (x1, x2) lattice at height ``x3``.

    Node (i, j) sits at ``origin + (i h1, j h2)`` with ``h = length / n``.
    """

    u1: np.ndarray
    u2: np.ndarray
    u3: np.ndarray
    lengths: tuple = (TWO_PI, TWO_PI)
    origin: tuple = (0.0, 0.0)
    x3: float = 0.0

    def __post_init__(self):
        arrs = [np.asarray(a, dtype=float) for a in (self.u1, self.u2, self.u3)]
        if arrs[0].ndim != 2 or any(a.shape != arrs[0].shape for a in arrs):
            raise GridError("slice components must be 2D arrays of one shape")
        for name, a in zip(("u1", "u2", "u3"), arrs):
            object.__setattr__(self, name, a)

    @property
    def shape(self):
        return self.u1.shape

    @property
    def spacing(self):
        return tuple(L / n for L, n in zip(self.lengths, self.shape))

    def coordinates(self):
        h1, h2 = self.spacing
        n1, n2 = self.shape
        x1 = self.origin[0] + h1 * np.arange(n1)
        x2 = self.origin[1] + h2 * np.arange(n2)
        return np.meshgrid(x1, x2, indexing="ij")

    @classmethod
    def sample(cls, fn, n=64, lengths=(TWO_PI, TWO_PI), origin=None, x3=0.0):
        """Slice from ``fn(x1, x2, x3) -> (u1, u2, u3)``.

        The default origin is half a cell, which keeps nodes off the
        symmetry lines where trigonometric data vanish exactly.
        """
        n1, n2 = (n, n) if np.isscalar(n) else n
        if origin is None:
            origin = (0.5 * lengths[0] / n1, 0.5 * lengths[1] / n2)
        sl = cls(np.zeros((n1, n2)), np.zeros((n1, n2)), np.zeros((n1, n2)), tuple(lengths), tuple(origin), x3)
        X1, X2 = sl.coordinates()
        u = fn(X1, X2, np.full_like(X1, x3))
        return cls(*(np.broadcast_to(np.asarray(c, float), X1.shape) for c in u),
                   lengths=tuple(lengths), origin=tuple(origin), x3=x3)

    @classmethod
    def from_field(cls, u: VectorFieldGrid, k: int = 0):
        g = u.grid
        if g.cylindrical:
            raise GridError("Cauchy slices live on Cartesian grids")
        lengths = (g.spacing[0] * g.dims[0], g.spacing[1] * g.dims[1])
        return cls(u.values[0][:, :, k], u.values[1][:, :, k], u.values[2][:, :, k],
                   lengths, g.origin[:2], g.origin[2] + k * g.spacing[2])

    def to_field(self) -> VectorFieldGrid:
        h1, h2 = self.spacing
        g = Grid(self.origin + (self.x3,), (h1, h2, 1.0), self.shape + (1,))
        return VectorFieldGrid(g, np.stack([self.u1, self.u2, self.u3])[..., None])


def _wavenumbers(n, L):
    k = np.fft.fftfreq(n, d=L / n) * TWO_PI
    if n % 2 == 0:
        k[n // 2] = 0.0  # the Nyquist mode has no odd derivative
    return k


class _Spectral:
    def __init__(self, shape, lengths, filter_frac):
        n1, n2 = shape
        k1 = _wavenumbers(n1, lengths[0])
        k2 = _wavenumbers(n2, lengths[1])
        self.K1, self.K2 = np.meshgrid(k1, k2, indexing="ij")
        kmax1 = np.pi * n1 / lengths[0]
        kmax2 = np.pi * n2 / lengths[1]
        self.keep = (np.abs(self.K1) <= filter_frac * kmax1) & (np.abs(self.K2) <= filter_frac * kmax2)

    def d1(self, F):
        return np.real(np.fft.ifft2(1j * self.K1 * np.fft.fft2(F)))

    def d2(self, F):
        return np.real(np.fft.ifft2(1j * self.K2 * np.fft.fft2(F)))

    def filt(self, F):
        return np.real(np.fft.ifft2(np.where(self.keep, np.fft.fft2(F), 0.0)))


def strong_factor(initial: CauchySlice, tol: float = 1e-8):
    """Constant c with d1 u2 - d2 u1 = c u3 on the slice, or None.

    ``c`` is the least-squares fit; it is accepted when the misfit is below
    ``tol`` relative to the size of the vorticity component.
    """
    sp = _Spectral(initial.shape, initial.lengths, 1.0)
    num = sp.d1(initial.u2) - sp.d2(initial.u1)
    den = float(np.sum(initial.u3**2))
    if den == 0.0:
        return None
    c = float(np.sum(num * initial.u3) / den)
    scale = max(float(np.max(np.abs(num))), float(np.max(np.abs(initial.u3))) * abs(c), 1e-300)
    misfit = float(np.max(np.abs(num - c * initial.u3)))
    if misfit <= tol * scale or float(np.max(np.abs(num))) == 0.0:
        return c
    return None


@dataclass(frozen=True, eq=False)
class MarchResult:
    field: VectorFieldGrid
    mode: str
    factor: float | None = None


def march(
    initial: CauchySlice,
    depth: float = 0.2,
    steps: int = 40,
    filter_frac: float = 2.0 / 3.0,
    *,
    u3_min: float = 1e-6,
    mode: str = "auto",
    const_tol: float = 1e-8,
    blowup: float = 1e6,
) -> MarchResult:
    """March the slice to ``x3 + depth`` in ``steps`` RK4 steps.

    ``mode`` is ``"general"`` (pointwise quotient), ``"constant"`` (fixed
    factor estimated from the slice) or ``"auto"`` (constant when
    ``strong_factor`` finds one).  Raises U3Vanished when |u3| < u3_min on
    the initial slice or, in general mode, at any later step.
    """
    if mode not in ("auto", "general", "constant"):
        raise ValueError("mode must be 'auto', 'general' or 'constant'")
    if steps < 4:
        raise GridError("need at least 4 steps so the output grid admits the stencil")
    if not 0.0 < filter_frac <= 1.0:
        raise ValueError("filter_frac must lie in (0, 1]")
    U0 = np.stack([initial.u1, initial.u2, initial.u3])
    if not np.all(np.isfinite(U0)):
        raise BlowUp("initial slice contains NaN or Inf")
    h1, h2 = initial.spacing
    dz = depth / steps
    grid = Grid(initial.origin + (initial.x3,), (h1, h2, dz), initial.shape + (steps + 1,))
    norm0 = float(np.max(np.abs(U0)))
    if norm0 == 0.0:
        return MarchResult(VectorFieldGrid(grid, np.zeros((3,) + grid.dims)), "zero", 0.0)
    umin = float(np.min(np.abs(initial.u3)))
    if umin < u3_min:
        raise U3Vanished(f"|u3| = {umin:.3g} < u3_min = {u3_min:g} on the initial slice")

    c = None
    if mode in ("auto", "constant"):
        c = strong_factor(initial, const_tol if mode == "auto" else np.inf)
        if mode == "constant" and c is None:
            raise ValueError("slice has no defined constant factor")
    sp = _Spectral(initial.shape, initial.lengths, filter_frac)

    def rhs(t, U):
        u1, u2, u3 = U
        if c is None:
            q = (sp.d1(u2) - sp.d2(u1)) / u3
        else:
            q = c
        return np.stack([
            sp.d1(u3) + u2 * q,
            sp.d2(u3) - u1 * q,
            -(sp.d1(u1) + sp.d2(u2)),
        ])

    out = np.empty((3,) + grid.dims)
    out[..., 0] = U0
    U = U0
    with np.errstate(all="ignore"):
        for k in range(steps):
            U = rk4_step(rhs, 0.0, U, dz)
            U = np.stack([sp.filt(a) for a in U])
            if not np.all(np.isfinite(U)) or np.max(np.abs(U)) > blowup * norm0:
                raise BlowUp(f"field norm left the admissible range at x3 = {initial.x3 + (k + 1) * dz:.4g}")
            if c is None:
                m = float(np.min(np.abs(U[2])))
                if m < u3_min:
                    raise U3Vanished(f"|u3| = {m:.3g} < u3_min at x3 = {initial.x3 + (k + 1) * dz:.4g}")
            out[..., k + 1] = U
    return MarchResult(VectorFieldGrid(grid, out), "general" if c is None else "constant", c)


def recover_f(u: VectorFieldGrid, u3_min: float = 1e-6, *, order: int = 2, spectral: bool = False) -> ScalarFieldGrid:
    """f = (d1 u2 - d2 u1) / u3, the third component of curl u over u3.

    With ``spectral=True`` the (x1, x2) derivatives are taken by FFT,
    treating the grid as periodic with period ``n h``.
    """
    g = u.grid
    v = u.values
    m = float(np.min(np.abs(v[2])))
    if m < u3_min:
        raise U3Vanished(f"|u3| = {m:.3g} < u3_min = {u3_min:g}")
    if spectral:
        L = (g.spacing[0] * g.dims[0], g.spacing[1] * g.dims[1])
        k1 = _wavenumbers(g.dims[0], L[0])[:, None, None]
        k2 = _wavenumbers(g.dims[1], L[1])[None, :, None]
        d1u2 = np.real(np.fft.ifft(1j * k1 * np.fft.fft(v[1], axis=0), axis=0))
        d2u1 = np.real(np.fft.ifft(1j * k2 * np.fft.fft(v[0], axis=1), axis=1))
    else:
        d1u2 = diff(v[1], g.spacing[0], 0, order)
        d2u1 = diff(v[0], g.spacing[1], 1, order)
    return ScalarFieldGrid(g, (d1u2 - d2u1) / v[2])
