"""Adapted orthonormal frames of a scalar field and their connection data.

Given ``f`` with non-vanishing gradient, ``e3 = grad f / |grad f|`` and
(e1, e2) span the tangent planes of the level surfaces.  Connection forms
follow ``de_i = e_j w^j_i``; with this convention

    h_ij = <D_{e_j} e_i, e3>,   k_i = <D_{e_i} e2, e1>,   g = -ln|grad f|,

so that ``w^3_1 = h11 w^1 + h12 w^2 + g1 w^3``, ``w^3_2 = h12 w^1 +
h22 w^2 + g2 w^3`` and ``w^1_2 = k1 w^1 + k2 w^2 + k3 w^3``.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import AmbiguousPrincipalDirections, GradientTooSmall
from .grid import (
    ScalarFieldGrid,
    VectorFieldGrid,
    cross,
    directional_derivative,
    dot,
    gradient,
)

DEFAULT_ORDER = 4


class Umbilic(str, Enum):
    TOTALLY_UMBILIC = "TotallyUmbilic"
    NO_UMBILIC_POINTS = "NoUmbilicPoints"
    MIXED = "Mixed"


@dataclass(frozen=True, eq=False)
class AdaptedFrame:
    """Right-handed orthonormal frame with ``e3`` normal to the level sets.

    ``principal`` records whether (e1, e2) diagonalize the shape operator;
    ``seam`` is set when sign propagation could not make e1 continuous
    across every pair of neighbouring nodes.
    """

    e1: VectorFieldGrid
    e2: VectorFieldGrid
    e3: VectorFieldGrid
    principal: bool = True
    seam: bool = False

    @property
    def grid(self):
        return self.e3.grid

    def vectors(self):
        return (self.e1, self.e2, self.e3)

    def swapped(self):
        """Exchange the roles of e1 and e2, keeping the frame right-handed."""
        return AdaptedFrame(self.e2, -self.e1, self.e3, self.principal, self.seam)

    def rotated(self, angle):
        """Rotate (e1, e2) by a constant angle about e3."""
        c, s = np.cos(angle), np.sin(angle)
        e1 = VectorFieldGrid(self.grid, c * self.e1.values + s * self.e2.values)
        e2 = VectorFieldGrid(self.grid, -s * self.e1.values + c * self.e2.values)
        return AdaptedFrame(e1, e2, self.e3, self.principal, self.seam)

    def orthonormality_error(self):
        es = [e.values for e in self.vectors()]
        err = 0.0
        for i in range(3):
            for j in range(3):
                d = np.sum(es[i] * es[j], axis=0) - (1.0 if i == j else 0.0)
                err = max(err, float(np.max(np.abs(d))))
        return err

    def min_determinant(self):
        det = np.sum(np.cross(self.e1.values, self.e2.values, axis=0) * self.e3.values, axis=0)
        return float(np.min(det))


@dataclass(frozen=True, eq=False)
class FrameInvariants:
    g: ScalarFieldGrid
    g1: ScalarFieldGrid
    g2: ScalarFieldGrid
    g3: ScalarFieldGrid
    h11: ScalarFieldGrid
    h12: ScalarFieldGrid
    h22: ScalarFieldGrid
    k1: ScalarFieldGrid
    k2: ScalarFieldGrid
    k3: ScalarFieldGrid
    frame: AdaptedFrame
    order: int = DEFAULT_ORDER

    @property
    def h1(self):
        return ScalarFieldGrid(self.g.grid, 0.5 * (self.h11.values + self.h22.values))

    @property
    def h2(self):
        return ScalarFieldGrid(self.g.grid, 0.5 * (self.h11.values - self.h22.values))

    def fields(self):
        names = ("g", "g1", "g2", "g3", "h11", "h12", "h22", "k1", "k2", "k3")
        return {n: getattr(self, n) for n in names}


# ----------------------------------------------------------------------------
# construction helpers

def unit_normal(f: ScalarFieldGrid, tol=1e-8, order=DEFAULT_ORDER):
    """``e3`` and ``|grad f|``; raises where the gradient is too small."""
    gf = gradient(f, order)
    mag = np.sqrt(np.sum(gf.values**2, axis=0))
    if np.min(mag) < tol:
        idx = np.unravel_index(np.argmin(mag), mag.shape)
        raise GradientTooSmall(f"|grad f| = {mag[idx]:.3g} < {tol:g} at node {tuple(int(i) for i in idx)}")
    return VectorFieldGrid(f.grid, gf.values / mag), mag


def completion(e3: VectorFieldGrid):
    """Smooth orthonormal (t1, t2) with t1 the projection of a fixed axis.

    The axis least aligned with e3 over the whole grid is used, so the
    projection never degenerates when e3 stays inside a cone.
    """
    v = e3.values
    worst = [np.max(np.abs(v[i])) for i in range(3)]
    a = int(np.argmin(worst))
    t1 = -v[a] * v
    t1[a] += 1.0
    t1 = t1 / np.sqrt(np.sum(t1**2, axis=0))
    t1f = VectorFieldGrid(e3.grid, t1)
    return t1f, cross(e3, t1f)


def shape_operator(e3, t1, t2, order=DEFAULT_ORDER):
    """Components (s11, s12, s22) of S(X) = -D_X e3 in the basis (t1, t2)."""
    d1 = directional_derivative(e3, t1, order)
    d2 = directional_derivative(e3, t2, order)
    s11 = -np.sum(t1.values * d1.values, axis=0)
    s22 = -np.sum(t2.values * d2.values, axis=0)
    s12 = -0.5 * (np.sum(t1.values * d2.values, axis=0) + np.sum(t2.values * d1.values, axis=0))
    return s11, s12, s22


def eigen_gap(s11, s12, s22):
    """Half the difference of the principal curvatures, frame independent."""
    return np.sqrt((0.5 * (s11 - s22)) ** 2 + s12**2)


def _umbilic_mask(s11, s12, s22, eps):
    h1 = 0.5 * (s11 + s22)
    return eigen_gap(s11, s12, s22) <= eps * (1.0 + np.abs(h1))


def _seed(dims):
    return tuple(1 if n > 2 else 0 for n in dims)


def _sweep(E, axis, start):
    """Flip vectors along ``axis`` so that neighbours have positive overlap."""
    V = np.moveaxis(E, axis, 1)
    n = V.shape[1]
    for i in range(start + 1, n):
        d = np.sum(V[:, i] * V[:, i - 1], axis=0)
        V[:, i] *= np.where(d < 0, -1.0, 1.0)
    for i in range(start - 1, -1, -1):
        d = np.sum(V[:, i] * V[:, i + 1], axis=0)
        V[:, i] *= np.where(d < 0, -1.0, 1.0)


def propagate_signs(e1_values):
    """Deterministic line-by-line continuation from the seed node.

    Returns the sign-fixed array and whether any neighbouring pair still
    points in opposite directions (a seam).
    """
    E = np.array(e1_values, copy=True)
    i0, j0, k0 = _seed(E.shape[1:])
    _sweep(E[:, :, j0, k0], 1, i0)
    _sweep(E[:, :, :, k0], 2, j0)
    _sweep(E, 3, k0)
    seam = False
    for ax in (1, 2, 3):
        n = E.shape[ax]
        if n < 2:
            continue
        a = np.take(E, range(n - 1), axis=ax)
        b = np.take(E, range(1, n), axis=ax)
        if np.any(np.sum(a * b, axis=0) < 0):
            seam = True
    return E, seam


def adapted_frame(
    f: ScalarFieldGrid,
    tol: float = 1e-8,
    *,
    principal=None,
    umbilic_eps: float = 1e-6,
    ordering: str = "descending",
    order: int = DEFAULT_ORDER,
) -> AdaptedFrame:
    """Adapted frame of ``f``.

    Args:
        f: sampled scalar field with non-vanishing gradient.
        tol: lower bound on ``|grad f|``.
        principal: ``True`` demands principal directions and fails on umbilic
            nodes, ``False`` returns the smooth completion frame, ``None``
            picks the completion for totally umbilic inputs, principal
            directions for umbilic-free ones and fails on mixed ones.
        umbilic_eps: a node is umbilic when the eigen-gap is at most
            ``umbilic_eps * (1 + |mean curvature|)``.
        ordering: ``"descending"`` puts the larger shape-operator eigenvalue
            on e1, ``"ascending"`` the smaller one.
        order: finite-difference order (2 or 4).
    """
    if ordering not in ("descending", "ascending"):
        raise ValueError("ordering must be 'descending' or 'ascending'")
    e3, _ = unit_normal(f, tol, order)
    t1, t2 = completion(e3)
    if principal is False:
        return AdaptedFrame(t1, t2, e3, principal=False)
    s11, s12, s22 = shape_operator(e3, t1, t2, order)
    umb = _umbilic_mask(s11, s12, s22, umbilic_eps)
    if principal is None and np.all(umb):
        return AdaptedFrame(t1, t2, e3, principal=True)
    if np.any(umb):
        raise AmbiguousPrincipalDirections(
            f"{int(np.sum(umb))} umbilic node(s) within eps={umbilic_eps:g}; principal directions undefined"
        )
    psi = 0.5 * np.arctan2(2.0 * s12, s11 - s22)
    c, s = np.cos(psi), np.sin(psi)
    if ordering == "ascending":
        c, s = -s, c
    e1v = c * t1.values + s * t2.values
    e1v, seam = propagate_signs(e1v)
    e1 = VectorFieldGrid(f.grid, e1v)
    return AdaptedFrame(e1, cross(e3, e1), e3, principal=True, seam=seam)


def frame_invariants(f: ScalarFieldGrid, fr: AdaptedFrame, order: int = DEFAULT_ORDER) -> FrameInvariants:
    """Connection coefficients of ``fr`` together with g and its frame derivatives."""
    gf = gradient(f, order)
    mag = np.sqrt(np.sum(gf.values**2, axis=0))
    if np.min(mag) <= 0:
        raise GradientTooSmall("grad f vanishes on the grid")
    g = ScalarFieldGrid(f.grid, -np.log(mag))
    e1, e2, e3 = fr.vectors()
    gs = [directional_derivative(g, e, order) for e in (e1, e2, e3)]
    d1e1 = directional_derivative(e1, e1, order)
    d2e1 = directional_derivative(e1, e2, order)
    d1e2 = directional_derivative(e2, e1, order)
    d2e2 = directional_derivative(e2, e2, order)
    d3e2 = directional_derivative(e2, e3, order)
    h11 = dot(d1e1, e3)
    h22 = dot(d2e2, e3)
    h12 = (dot(d2e1, e3) + dot(d1e2, e3)) * 0.5
    k1 = dot(d1e2, e1)
    k2 = dot(d2e2, e1)
    k3 = dot(d3e2, e1)
    return FrameInvariants(g, gs[0], gs[1], gs[2], h11, h12, h22, k1, k2, k3, fr, order)


def _connection(inv):
    """w[i][j][c] = w^i_j(e_c) as arrays, indices 0-based."""
    z = np.zeros(inv.g.grid.dims)
    w31 = [inv.h11.values, inv.h12.values, inv.g1.values]
    w32 = [inv.h12.values, inv.h22.values, inv.g2.values]
    w12 = [inv.k1.values, inv.k2.values, inv.k3.values]
    w = [[[z] * 3 for _ in range(3)] for _ in range(3)]
    w[0][1] = w12
    w[1][0] = [-a for a in w12]
    w[2][0] = w31
    w[0][2] = [-a for a in w31]
    w[2][1] = w32
    w[1][2] = [-a for a in w32]
    return w


def structure_residual(fr: AdaptedFrame, inv: FrameInvariants, order=None) -> ScalarFieldGrid:
    """Pointwise mismatch in the first structure equation dw^i = -w^i_j ^ w^j.

    The left side is evaluated through Lie brackets of the frame,
    ``dw^i(e_a, e_b) = -<e_i, [e_a, e_b]>``; the right side from the
    invariants.
    """
    order = inv.order if order is None else order
    es = fr.vectors()
    D = [[directional_derivative(es[b], es[a], order).values for b in range(3)] for a in range(3)]
    w = _connection(inv)
    total = np.zeros(fr.grid.dims)
    for a, b in ((0, 1), (0, 2), (1, 2)):
        br = D[a][b] - D[b][a]
        for i in range(3):
            lhs = -np.sum(es[i].values * br, axis=0)
            rhs = -w[i][b][a] + w[i][a][b]
            total += (lhs - rhs) ** 2
    return ScalarFieldGrid(fr.grid, np.sqrt(total))


def umbilic_classify(inv: FrameInvariants, eps: float = 1e-6) -> Umbilic:
    """Umbilic type from the invariants; uses the frame-independent eigen-gap."""
    umb = _umbilic_mask(inv.h11.values, inv.h12.values, inv.h22.values, eps)
    if np.all(umb):
        return Umbilic.TOTALLY_UMBILIC
    if not np.any(umb):
        return Umbilic.NO_UMBILIC_POINTS
    return Umbilic.MIXED
