"""Translation and rotation invariant fields from a flux function.

For a profile Phi the flux function H solves a semilinear elliptic equation;
u follows from H by differentiation and f = Phi'(H).
"""
import numpy as np

from beltrami import (
    Grid,
    NewtonDiverged,
    assemble_rotation,
    assemble_translation,
    solve_rotation,
    solve_translation,
    verify_beltrami,
)

# linear profile: Helmholtz eigenfunction sin(2x) sin(1.5y) with f = 2.5
for n in (17, 33, 65):
    g = Grid.box((0.2, 0.3, 0.0), (1.1, 1.2, 0.0), (n, n, 1))
    fs = solve_translation("2.5*t", g, "sin(2*x)*sin(1.5*y)")
    X, Y, _ = g.mesh()
    print(f"Helmholtz n={n:2d}: |H - exact| = {np.abs(fs.H.values - np.sin(2 * X) * np.sin(1.5 * Y)).max():.2e}")

# nonlinear profile, with data vanishing at the corners of the box
g = Grid.box((0, 0, 0), (1, 1, 0), (33, 33, 1))
fs = solve_translation("t^2/2", g, "(1+x)*sin(pi*y)")
print("\nNewton residual history:", ", ".join(f"{r:.1e}" for r in fs.history))
u, f = assemble_translation(fs)
print("translation field:", verify_beltrami(u, f, order=4).as_dict())

g = Grid.box((0.5, 0, 0), (1.5, 0, 1), (33, 1, 33), "cylindrical_rz")
fs = solve_rotation("t^2/2", g, "r^2*sin(pi*z)")
u, f = assemble_rotation(fs)
print("rotation field:   ", verify_beltrami(u, f, order=4).as_dict())

# a profile growing too fast has no solution near the data
try:
    solve_translation("exp(10*t)", Grid.box((0, 0, 0), (1, 1, 0), (17, 17, 1)), "5+x")
except NewtonDiverged as exc:
    print("\nexp(10 t):", exc.args[0])
