"""Torsion-absorption coefficients and the umbilic/non-umbilic trichotomy."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .frames import (
    DEFAULT_ORDER,
    AdaptedFrame,
    adapted_frame,
    completion,
    eigen_gap,
    frame_invariants,
    shape_operator,
    unit_normal,
)
from .grid import ScalarFieldGrid, directional_derivative, gradient


class Case(str, Enum):
    CASE1_PARALLEL_PLANES = "Case1_ParallelPlanes"
    CASE1_CONCENTRIC_SPHERES = "Case1_ConcentricSpheres"
    CASE2_UMBILIC_NO_SOLUTIONS = "Case2_UmbilicNoSolutions"
    CASE3_NON_UMBILIC = "Case3_NonUmbilic"
    INDETERMINATE_MIXED = "Indeterminate_Mixed"


class SolutionSpace(str, Enum):
    TWO_FUNCTIONS_OF_ONE_VARIABLE = "TwoFunctionsOfOneVariable"
    NONE = "None"
    AT_MOST_FINITE_DIM_3 = "AtMostFiniteDim(3)"
    UNKNOWN = "Unknown"


PREDICTED = {
    Case.CASE1_PARALLEL_PLANES: SolutionSpace.TWO_FUNCTIONS_OF_ONE_VARIABLE,
    Case.CASE1_CONCENTRIC_SPHERES: SolutionSpace.TWO_FUNCTIONS_OF_ONE_VARIABLE,
    Case.CASE2_UMBILIC_NO_SOLUTIONS: SolutionSpace.NONE,
    Case.CASE3_NON_UMBILIC: SolutionSpace.AT_MOST_FINITE_DIM_3,
    Case.INDETERMINATE_MIXED: SolutionSpace.UNKNOWN,
}


@dataclass(frozen=True, eq=False)
class TorsionReport:
    c_p1: ScalarFieldGrid
    c_u1: ScalarFieldGrid
    c_u2: ScalarFieldGrid
    second_level: ScalarFieldGrid
    scale: float
    eps: float

    def sup_norms(self):
        return {
            "c_p1": self.c_p1.sup(),
            "c_u1": self.c_u1.sup(),
            "c_u2": self.c_u2.sup(),
            "second_level": self.second_level.sup(),
        }

    def vanishes(self, name):
        """True when the named coefficient is zero to within eps * scale."""
        return getattr(self, name).sup() <= self.eps * self.scale

    def nowhere_zero(self, name):
        return float(np.min(np.abs(getattr(self, name).values))) > self.eps * self.scale


@dataclass(frozen=True, eq=False)
class Classification:
    case: Case
    predicted_solution_space: SolutionSpace
    second_level_vanishes: bool | None = None
    diagnostics: dict = field(default_factory=dict)
    torsion: TorsionReport | None = None

    def to_dict(self, grid=None):
        out = {
            "case": self.case.value,
            "predicted_solution_space": self.predicted_solution_space.value,
            "eps": self.diagnostics.get("eps"),
            "sup_norms": self.torsion.sup_norms() if self.torsion is not None else {},
            "diagnostics": {k: v for k, v in self.diagnostics.items() if k != "eps"},
        }
        if self.case is Case.CASE3_NON_UMBILIC:
            out["second_level_vanishes"] = bool(self.second_level_vanishes)
        if grid is not None:
            out["grid"] = grid.descriptor()
        return out


def field_scale(inv, grid):
    """Curvature scale used to quantize "identically zero" on a grid."""
    parts = [
        inv.h11.sup(),
        inv.h22.sup(),
        inv.g1.sup(),
        inv.g2.sup(),
        1.0 / grid.diameter(),
    ]
    return float(max(parts))


def torsion_coefficients(inv, f: ScalarFieldGrid, eps: float = 1e-4, order=None) -> TorsionReport:
    """Coefficients of p1, u1, u2 in the absorption condition and 2 k3 - f."""
    order = inv.order if order is None else order
    e1, e2, e3 = inv.frame.vectors()

    def d(F, e):
        return directional_derivative(F, e, order).values

    fv = f.values
    k3 = inv.k3.values
    g1, g2 = inv.g1.values, inv.g2.values
    h11, h22 = inv.h11.values, inv.h22.values
    g13 = d(inv.g1, e3)
    g23 = d(inv.g2, e3)
    c_p1 = 2.0 * (h11 - h22)
    c_u1 = g13 + d(inv.h11, e1) - d(inv.h22, e1) - g1 * h22 + g2 * (k3 - 2.0 * fv)
    c_u2 = g23 + d(inv.h22, e2) - d(inv.h11, e2) - g1 * (k3 - 2.0 * fv) - g2 * h11
    grid = f.grid
    return TorsionReport(
        ScalarFieldGrid(grid, c_p1),
        ScalarFieldGrid(grid, c_u1),
        ScalarFieldGrid(grid, c_u2),
        ScalarFieldGrid(grid, 2.0 * k3 - fv),
        field_scale(inv, grid),
        eps,
    )


def classify(f: ScalarFieldGrid, eps: float = 1e-4, order: int = DEFAULT_ORDER, tol: float = 1e-8) -> Classification:
    """Place ``f`` in the planes/spheres, umbilic-no-solution or non-umbilic case.

    Umbilicity is decided from the frame-independent eigen-gap of the shape
    operator (``|c_p1| = 4 * gap`` in a principal frame) and straightness
    of the normal lines from the tangential part of ``grad g``; both are
    compared against ``eps`` times the curvature scale of the field.
    """
    grid = f.grid
    e3, mag = unit_normal(f, tol, order)
    t1, t2 = completion(e3)
    s11, s12, s22 = shape_operator(e3, t1, t2, order)
    gap = eigen_gap(s11, s12, s22)
    c_p1_mag = 4.0 * gap
    h1 = 0.5 * (s11 + s22)
    g = ScalarFieldGrid(grid, -np.log(mag))
    gg = gradient(g, order).values
    gn = np.sum(gg * e3.values, axis=0)
    g_tan = np.sqrt(np.maximum(np.sum(gg**2, axis=0) - gn**2, 0.0))
    scale = float(max(np.max(np.abs(s11)), np.max(np.abs(s22)), np.max(g_tan), 1.0 / grid.diameter()))
    thresh = eps * scale
    diag = {
        "eps": eps,
        "scale": scale,
        "sup_eigen_gap_term": float(np.max(c_p1_mag)),
        "min_eigen_gap_term": float(np.min(c_p1_mag)),
        "sup_mean_curvature": float(np.max(np.abs(h1))),
        "sup_tangential_grad_g": float(np.max(g_tan)),
        "order": order,
    }

    if np.max(c_p1_mag) <= thresh:
        fr = AdaptedFrame(t1, t2, e3, principal=True)
        inv = frame_invariants(f, fr, order)
        rep = torsion_coefficients(inv, f, eps, order)
        if np.max(g_tan) <= thresh:
            case = Case.CASE1_PARALLEL_PLANES if np.max(np.abs(h1)) <= thresh else Case.CASE1_CONCENTRIC_SPHERES
        else:
            case = Case.CASE2_UMBILIC_NO_SOLUTIONS
        return Classification(case, PREDICTED[case], None, diag, rep)

    if np.min(c_p1_mag) > thresh:
        fr = adapted_frame(f, tol, principal=True, umbilic_eps=0.0, order=order)
        inv = frame_invariants(f, fr, order)
        rep = torsion_coefficients(inv, f, eps, order)
        sl_scale = max(scale, float(np.max(np.abs(f.values))))
        vanishes = bool(rep.second_level.sup() <= eps * sl_scale)
        diag["seam"] = fr.seam
        case = Case.CASE3_NON_UMBILIC
        return Classification(case, PREDICTED[case], vanishes, diag, rep)

    case = Case.INDETERMINATE_MIXED
    diag["umbilic_fraction"] = float(np.mean(c_p1_mag <= thresh))
    return Classification(case, PREDICTED[case], None, diag, None)
