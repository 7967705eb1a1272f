"""Which proportionality factors f admit nontrivial Beltrami fields?

The level sets of f decide it: planes and spheres leave room for many
solutions, other umbilic foliations for none, and non-umbilic ones for at
most a three dimensional family.
"""
from beltrami import Grid, adapted_frame, classify, frame_invariants, parse, sample, torsion_coefficients

cases = [
    ("z", (0, 0, 0), (1, 1, 1)),
    ("sqrt(x^2+y^2+z^2)", (1, 1, 1), (1.5, 1.5, 1.5)),
    ("atan(y/x)", (1, 0.5, 0), (1.5, 1, 0.5)),
    ("sqrt(x^2+y^2)", (0.5, 0.5, 0), (1.5, 1.5, 1)),
    ("x^2 + 2*y^2 + 3*z^2", (0.5, 0.5, 0.5), (1, 1, 1)),
    ("z - 0.3*x^3", (-0.5, 0, 0), (0.5, 1, 1)),
]

for text, lo, hi in cases:
    f = sample(parse(text), Grid.box(lo, hi, (33, 33, 33)))
    c = classify(f)
    extra = ""
    if c.second_level_vanishes is not None:
        extra = f"  second level vanishes: {c.second_level_vanishes}"
    print(f"{text:22s} -> {c.case.value:26s} {c.predicted_solution_space.value}{extra}")

# connection coefficients on the cylinders f = r, smaller curvature first
f = sample(parse("sqrt(x^2+y^2)"), Grid.box((0.5, 0.5, 0), (1.5, 1.5, 1), (33, 33, 33)))
inv = frame_invariants(f, adapted_frame(f, ordering="ascending"))
r = f.values
print("\ncylinders: max |h11 + 1/r| =", abs(inv.h11.values + 1 / r).max())
rep = torsion_coefficients(inv, f)
print("torsion coefficient sup norms:", {k: f"{v:.2e}" for k, v in rep.sup_norms().items()})
