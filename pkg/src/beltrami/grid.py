"""Uniform structured grids and finite-difference vector calculus.

Arrays are stored in ``ij`` layout: a scalar field has shape ``dims`` and a
vector field has shape ``(3,) + dims``.  An axis with a single node is
"unused": derivatives along it are zero, which is how 2D problems and
axisymmetric extrusions are represented.

Cylindrical grids use axes (r, theta, z) and store vector components in the
orthonormal basis (e_r, e_theta, e_z).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import GridError, NonFiniteInput, NotUnit

MIN_NODES = 5
UNIT_TOL = 1e-8


class Coords(str, Enum):
    CARTESIAN = "cartesian"
    CYLINDRICAL_RZ = "cylindrical_rz"


@dataclass(frozen=True)
class Grid:
    """Uniform node lattice ``origin + spacing * index``."""

    origin: tuple
    spacing: tuple
    dims: tuple
    coords: Coords = Coords.CARTESIAN

    def __post_init__(self):
        origin = tuple(float(v) for v in self.origin)
        spacing = tuple(float(v) for v in self.spacing)
        dims = tuple(int(v) for v in self.dims)
        if not (len(origin) == len(spacing) == len(dims) == 3):
            raise GridError("origin, spacing and dims need three entries each")
        if not all(np.isfinite(origin + spacing)):
            raise GridError("origin and spacing must be finite")
        if any(h <= 0 for h in spacing):
            raise GridError(f"spacing must be strictly positive, got {spacing}")
        for n in dims:
            if n != 1 and n < MIN_NODES:
                raise GridError(f"used axes need at least {MIN_NODES} nodes, got dims={dims}")
        coords = Coords(self.coords)
        if coords is Coords.CYLINDRICAL_RZ and origin[0] <= 0:
            raise GridError("cylindrical grids must exclude the axis (r origin > 0)")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "coords", coords)

    @classmethod
    def box(cls, lo, hi, dims, coords=Coords.CARTESIAN):
        """Grid whose first and last nodes sit at ``lo`` and ``hi``.

        Unused axes (``n == 1``) sit at ``lo`` with a nominal spacing of one.
        """
        spacing = []
        for a, b, n in zip(lo, hi, dims):
            spacing.append((b - a) / (n - 1) if n > 1 else 1.0)
        return cls(tuple(lo), tuple(spacing), tuple(dims), coords)

    @property
    def shape(self):
        return self.dims

    @property
    def cylindrical(self):
        return self.coords is Coords.CYLINDRICAL_RZ

    def used(self, axis):
        return self.dims[axis] > 1

    def axis(self, i):
        return self.origin[i] + self.spacing[i] * np.arange(self.dims[i])

    def upper(self):
        return tuple(o + h * (n - 1) for o, h, n in zip(self.origin, self.spacing, self.dims))

    def mesh(self):
        return np.meshgrid(self.axis(0), self.axis(1), self.axis(2), indexing="ij")

    def min_spacing(self):
        hs = [h for h, n in zip(self.spacing, self.dims) if n > 1]
        return min(hs) if hs else 1.0

    def cartesian_mesh(self):
        """Cartesian positions (x, y, z) of every node."""
        a, b, c = self.mesh()
        if self.cylindrical:
            return a * np.cos(b), a * np.sin(b), c
        return a, b, c

    def bindings(self):
        """Coordinate arrays keyed by expression variable names."""
        a, b, c = self.mesh()
        if self.cylindrical:
            return {"r": a, "theta": b, "z": c, "x": a * np.cos(b), "y": a * np.sin(b)}
        return {"x": a, "y": b, "z": c, "r": np.hypot(a, b), "theta": np.arctan2(b, a)}

    def diameter(self):
        pts = np.stack([p.ravel() for p in self.cartesian_mesh()])
        ext = pts.max(axis=1) - pts.min(axis=1)
        return float(np.sqrt(np.sum(ext**2)))

    def descriptor(self):
        return {
            "coords": self.coords.value,
            "origin": list(self.origin),
            "spacing": list(self.spacing),
            "dims": list(self.dims),
        }


@dataclass(frozen=True, eq=False)
class ScalarFieldGrid:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.dims:
            raise GridError(f"scalar values shape {v.shape} does not match dims {self.grid.dims}")
        object.__setattr__(self, "values", v)

    def sup(self):
        return float(np.max(np.abs(self.values)))

    def __neg__(self):
        return ScalarFieldGrid(self.grid, -self.values)

    def __add__(self, other):
        return ScalarFieldGrid(self.grid, self.values + _vals(other))

    def __sub__(self, other):
        return ScalarFieldGrid(self.grid, self.values - _vals(other))

    def __mul__(self, other):
        return ScalarFieldGrid(self.grid, self.values * _vals(other))

    __radd__ = __add__
    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class VectorFieldGrid:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (3,) + self.grid.dims:
            raise GridError(f"vector values shape {v.shape} does not match (3,)+{self.grid.dims}")
        object.__setattr__(self, "values", v)

    def component(self, i):
        return ScalarFieldGrid(self.grid, self.values[i])

    def magnitude(self):
        return ScalarFieldGrid(self.grid, np.sqrt(np.sum(self.values**2, axis=0)))

    def sup(self):
        return float(np.max(np.sqrt(np.sum(self.values**2, axis=0))))

    def __neg__(self):
        return VectorFieldGrid(self.grid, -self.values)

    def __add__(self, other):
        return VectorFieldGrid(self.grid, self.values + _vals(other))

    def __sub__(self, other):
        return VectorFieldGrid(self.grid, self.values - _vals(other))

    def __mul__(self, other):
        # scalar fields broadcast over the component axis
        return VectorFieldGrid(self.grid, self.values * _vals(other))

    __radd__ = __add__
    __rmul__ = __mul__


def _vals(x):
    if isinstance(x, (ScalarFieldGrid, VectorFieldGrid)):
        return x.values
    return x


def _finite(arr, what="field"):
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInput(f"{what} contains NaN or Inf")


def vector_from(grid, a, b, c):
    return VectorFieldGrid(grid, np.stack([_vals(a), _vals(b), _vals(c)]))


def dot(a, b):
    return ScalarFieldGrid(a.grid, np.sum(a.values * b.values, axis=0))


def cross(a, b):
    return VectorFieldGrid(a.grid, np.cross(a.values, b.values, axis=0))


def normalize(u):
    mag = np.sqrt(np.sum(u.values**2, axis=0))
    return VectorFieldGrid(u.grid, u.values / mag)


# ----------------------------------------------------------------------------
# one-dimensional stencils

_C0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
_C1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0


def _diff4(F, h, axis):
    F = np.moveaxis(F, axis, 0)
    out = np.empty_like(F)
    out[2:-2] = (F[:-4] - 8.0 * F[1:-3] + 8.0 * F[3:-1] - F[4:]) / 12.0
    out[0] = np.tensordot(_C0, F[:5], axes=1)
    out[1] = np.tensordot(_C1, F[:5], axes=1)
    out[-1] = -np.tensordot(_C0, F[:-6:-1], axes=1)
    out[-2] = -np.tensordot(_C1, F[:-6:-1], axes=1)
    return np.moveaxis(out / h, 0, axis)


def diff(F, h, axis, order=2):
    """Derivative of array ``F`` along ``axis`` with spacing ``h``.

    ``order=2`` uses centred differences with second-order one-sided rows at
    the ends (exact for quadratics); ``order=4`` the five-point analogue.
    Axes of length one return zeros.
    """
    n = F.shape[axis]
    if n == 1:
        return np.zeros_like(F)
    if order == 2:
        return np.gradient(F, h, axis=axis, edge_order=2)
    if order == 4:
        return _diff4(F, h, axis)
    raise ValueError(f"unsupported stencil order {order}")


def diff2(F, h, axis):
    """Second derivative, centred inside, second-order one-sided at the ends."""
    n = F.shape[axis]
    if n == 1:
        return np.zeros_like(F)
    F = np.moveaxis(F, axis, 0)
    out = np.empty_like(F)
    out[1:-1] = F[:-2] - 2.0 * F[1:-1] + F[2:]
    out[0] = 2.0 * F[0] - 5.0 * F[1] + 4.0 * F[2] - F[3]
    out[-1] = 2.0 * F[-1] - 5.0 * F[-2] + 4.0 * F[-3] - F[-4]
    return np.moveaxis(out / h**2, 0, axis)


def _partials(values, grid, order, lead=0):
    """Physical partial derivatives along the three grid directions.

    For cylindrical grids the theta entry is (1/r) d/dtheta.
    """
    h = grid.spacing
    d = [diff(values, h[i], lead + i, order) for i in range(3)]
    if grid.cylindrical:
        r = grid.mesh()[0]
        d[1] = d[1] / r
    return d


# ----------------------------------------------------------------------------
# operators

def gradient(f: ScalarFieldGrid, order: int = 2) -> VectorFieldGrid:
    _finite(f.values, "scalar field")
    return VectorFieldGrid(f.grid, np.stack(_partials(f.values, f.grid, order)))


def divergence(u: VectorFieldGrid, order: int = 2) -> ScalarFieldGrid:
    _finite(u.values, "vector field")
    g, h = u.grid, u.grid.spacing
    v = u.values
    if g.cylindrical:
        r = g.mesh()[0]
        out = (diff(r * v[0], h[0], 0, order) + diff(v[1], h[1], 1, order)) / r
        out = out + diff(v[2], h[2], 2, order)
    else:
        out = sum(diff(v[i], h[i], i, order) for i in range(3))
    return ScalarFieldGrid(g, out)


def curl(u: VectorFieldGrid, order: int = 2) -> VectorFieldGrid:
    _finite(u.values, "vector field")
    g, h = u.grid, u.grid.spacing
    v = u.values

    def d(c, a):
        return diff(v[c], h[a], a, order)

    if g.cylindrical:
        r = g.mesh()[0]
        c0 = d(2, 1) / r - d(1, 2)
        c1 = d(0, 2) - d(2, 0)
        c2 = (diff(r * v[1], h[0], 0, order) - d(0, 1)) / r
    else:
        c0 = d(2, 1) - d(1, 2)
        c1 = d(0, 2) - d(2, 0)
        c2 = d(1, 0) - d(0, 1)
    return VectorFieldGrid(g, np.stack([c0, c1, c2]))


def laplacian(f: ScalarFieldGrid, order: int = 2) -> ScalarFieldGrid:
    """Scalar Laplacian; direct second differences on Cartesian order-2 grids."""
    _finite(f.values, "scalar field")
    g = f.grid
    if g.cylindrical or order != 2:
        return divergence(gradient(f, order), order)
    out = sum(diff2(f.values, g.spacing[i], i) for i in range(3))
    return ScalarFieldGrid(g, out)


def directional_derivative(F, e: VectorFieldGrid, order: int = 2):
    """(e . grad) F for scalar or vector F; e must be unit length."""
    _finite(e.values, "direction field")
    mag = np.sqrt(np.sum(e.values**2, axis=0))
    if np.max(np.abs(mag - 1.0)) > UNIT_TOL:
        raise NotUnit(f"direction field deviates from unit length by {np.max(np.abs(mag - 1.0)):.3g}")
    g = F.grid
    ev = e.values
    if isinstance(F, ScalarFieldGrid):
        _finite(F.values, "scalar field")
        d = _partials(F.values, g, order)
        return ScalarFieldGrid(g, ev[0] * d[0] + ev[1] * d[1] + ev[2] * d[2])
    _finite(F.values, "vector field")
    d = _partials(F.values, g, order, lead=1)
    out = ev[0] * d[0] + ev[1] * d[1] + ev[2] * d[2]
    if g.cylindrical:
        # basis vectors e_r, e_theta turn along e_theta
        r = g.mesh()[0]
        w = ev[1] / r
        out = out.copy()
        out[0] -= w * F.values[1]
        out[1] += w * F.values[0]
    return VectorFieldGrid(g, out)


def jacobian_sup(u: VectorFieldGrid, order: int = 2) -> float:
    """Largest physical partial derivative of any component (norm of grad u)."""
    d = _partials(u.values, u.grid, order, lead=1)
    return float(max(np.max(np.abs(x)) for x in d))
