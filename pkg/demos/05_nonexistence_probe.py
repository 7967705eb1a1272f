"""Evolve tangential data along the normals of the level sets of f.

For f = z the evolved data stays compatible; for f = theta (half planes
through the axis) the tangential constraints fail by orders of magnitude,
matching the prediction that no nontrivial field exists.
"""
import numpy as np

from beltrami import Grid, adapted_frame, evolve_level_surfaces, frame_invariants, parse, sample

g = Grid.box((0, 0, 0), (1, 1, 1), (33, 33, 33))
f = sample(parse("z"), g)
inv = frame_invariants(f, adapted_frame(f))
res = evolve_level_surfaces(lambda x, y, z: (x, -y), inv, f, 1.5)
print(f"f = z:     residual {res.compatibility_residual:.2e}, compatible {res.compatible}")

g = Grid.box((0.5, 0.0, 0.0), (1.5, 1.0, 1.0), (33, 33, 33))
f = sample(parse("atan(y/x)"), g)
inv = frame_invariants(f, adapted_frame(f, principal=False))


def data(a):
    # satisfies the tangential constraints on the starting half plane
    def fn(x, y, z):
        r = np.hypot(x, y)
        return 2 * a[0] + 2 * a[2] * z + a[3] * (4 * r * r - 8 * z * z), -a[1] / r - a[2] * r + 8 * a[3] * r * z
    return fn


rng = np.random.default_rng(0)
for _ in range(3):
    a = rng.uniform(-1, 1, 4)
    res = evolve_level_surfaces(data(a), inv, f, 2.0)
    print(f"f = theta: initial {res.initial_residual:.1e} -> evolved {res.compatibility_residual:.1e} "
          f"({res.amplification:.0f}x), compatible {res.compatible}")
