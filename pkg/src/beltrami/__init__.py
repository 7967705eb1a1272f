"""Construction, classification and verification of Beltrami fields.

A Beltrami field satisfies ``curl u = f u`` and ``div u = 0``.  The package
works on uniform structured grids (Cartesian or cylindrical) and provides:

* grid calculus and BFG1 / VTK I/O (``grid``, ``io``)
* an expression language with exact derivatives (``expr``)
* adapted frames and their connection coefficients (``frames``)
* the torsion test and geometric classification of f (``obstruction``)
* the frame form of the equations and normal-line evolution (``frame_pde``)
* Cauchy marching off a periodic slice (``cauchy``)
* translation and rotation symmetric constructions (``symmetric``)
* closed-form oracle fields (``reference``)
"""
from .cauchy import CauchySlice, MarchResult, march, recover_f, strong_factor
from .errors import (
    AmbiguousPrincipalDirections,
    BeltramiError,
    BlowUp,
    CRViolation,
    DomainError,
    GradientTooSmall,
    GridError,
    IncompatibleInitialData,
    NewtonDiverged,
    NonFiniteInput,
    NotHarmonic,
    NotUnit,
    ParseError,
    StepOutOfDomain,
    U3Vanished,
    UnboundVariable,
)
from .expr import Expr, differentiate, parse, sample, to_string
from .frame_pde import (
    CylinderSolution,
    EvolutionResult,
    TangentialField,
    cylinder_ode_solve,
    evolve_level_surfaces,
    system_residual,
    trace_normal_lines,
)
from .frames import (
    AdaptedFrame,
    FrameInvariants,
    Umbilic,
    adapted_frame,
    frame_invariants,
    structure_residual,
    umbilic_classify,
)
from .grid import (
    Coords,
    Grid,
    ScalarFieldGrid,
    VectorFieldGrid,
    curl,
    directional_derivative,
    divergence,
    gradient,
    laplacian,
)
from .io import read_bfg1, report_json, write_bfg1, write_report, write_vtk
from .obstruction import Case, Classification, SolutionSpace, TorsionReport, classify, torsion_coefficients
from .reference import (
    ABC,
    Cylinder,
    HarmonicGradient,
    Lundquist,
    OracleSpec,
    PlanarCR,
    bessel_j0,
    bessel_j1,
    materialize,
)
from .symmetric import (
    BeltramiReport,
    FluxSolve,
    NewtonOptions,
    assemble_rotation,
    assemble_translation,
    solve_rotation,
    solve_translation,
    verify_beltrami,
)

__version__ = "0.1.0"

__all__ = [
    "ABC",
    "AdaptedFrame",
    "AmbiguousPrincipalDirections",
    "BeltramiError",
    "BeltramiReport",
    "BlowUp",
    "CRViolation",
    "Case",
    "CauchySlice",
    "Classification",
    "Coords",
    "Cylinder",
    "CylinderSolution",
    "DomainError",
    "EvolutionResult",
    "Expr",
    "FluxSolve",
    "FrameInvariants",
    "GradientTooSmall",
    "Grid",
    "GridError",
    "HarmonicGradient",
    "IncompatibleInitialData",
    "Lundquist",
    "MarchResult",
    "NewtonDiverged",
    "NewtonOptions",
    "NonFiniteInput",
    "NotHarmonic",
    "NotUnit",
    "OracleSpec",
    "ParseError",
    "PlanarCR",
    "ScalarFieldGrid",
    "SolutionSpace",
    "StepOutOfDomain",
    "TangentialField",
    "TorsionReport",
    "U3Vanished",
    "Umbilic",
    "UnboundVariable",
    "VectorFieldGrid",
    "adapted_frame",
    "assemble_rotation",
    "assemble_translation",
    "bessel_j0",
    "bessel_j1",
    "classify",
    "curl",
    "cylinder_ode_solve",
    "differentiate",
    "directional_derivative",
    "divergence",
    "evolve_level_surfaces",
    "frame_invariants",
    "gradient",
    "laplacian",
    "march",
    "materialize",
    "parse",
    "read_bfg1",
    "recover_f",
    "report_json",
    "sample",
    "solve_rotation",
    "solve_translation",
    "strong_factor",
    "structure_residual",
    "system_residual",
    "to_string",
    "torsion_coefficients",
    "trace_normal_lines",
    "umbilic_classify",
    "verify_beltrami",
    "write_bfg1",
    "write_report",
    "write_vtk",
]
