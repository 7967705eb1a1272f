"""Closed-form Beltrami fields and how fast the grid residuals shrink."""
import numpy as np

from beltrami import ABC, HarmonicGradient, Grid, Lundquist, materialize, verify_beltrami

kinds = {
    "ABC(1,1,1)": (ABC(), (0, 0, 0), (1, 1, 1)),
    "grad exp(x)cos(y)": (HarmonicGradient(), (0, 0, 0), (1, 1, 1)),
    "Lundquist c=1": (Lundquist(1.0), (0.5, -0.5, 0.5), (1.5, 0.5, 1.5)),
}

for name, (kind, lo, hi) in kinds.items():
    prev = None
    for n in (17, 33, 65):
        g = Grid.box(lo, hi, (n, n, n))
        u, f = materialize(kind, g)
        rep = verify_beltrami(u, f)
        rate = "" if prev is None else f"  rate {np.log2(prev / rep.curl_res):.2f}"
        print(f"{name:20s} n={n:3d}  curl {rep.curl_res:.2e}  div {rep.div_res:.2e}{rate}")
        prev = rep.curl_res
    print()

# the same Lundquist field on a cylindrical grid has components (0, J1, J0)
g = Grid.box((0.5, 0.0, 0.0), (3.0, 1.0, 1.0), (33, 9, 9), "cylindrical_rz")
u, f = materialize(Lundquist(2.0), g)
print("cylindrical grid, order 4:", verify_beltrami(u, f, order=4).as_dict())
