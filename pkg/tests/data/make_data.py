"""Regenerate the CLI fixtures in this directory: python3 make_data.py"""
from pathlib import Path

import numpy as np

from beltrami.cauchy import CauchySlice
from beltrami.grid import Grid, ScalarFieldGrid
from beltrami.io import write_bfg1
from beltrami.reference import ABC, materialize

HERE = Path(__file__).parent


def abc(A, B, C):
    def fn(x, y, z):
        return (A * np.sin(z) + C * np.cos(y), B * np.sin(x) + A * np.cos(z), C * np.sin(y) + B * np.cos(x))
    return fn


def main():
    g = Grid.box((0, 0, 0), (1, 1, 1), (9, 9, 9))
    u, f = materialize(ABC(), g)
    write_bfg1(HERE / "abc_u.bfg1", u)
    write_bfg1(HERE / "abc_f.bfg1", f)

    write_bfg1(HERE / "abc_slice.bfg1", CauchySlice.sample(abc(1.0, 1.0, 0.5), 32).to_field())

    p = Grid.box((0, 0, 0), (1, 1, 0), (17, 17, 1))
    X, Y, _ = p.mesh()
    write_bfg1(HERE / "bc_plane.bfg1", ScalarFieldGrid(p, (1 + X) * np.sin(np.pi * Y)))

    g = Grid.box((0, 0, 0), (1, 1, 1), (9, 9, 9))
    write_bfg1(HERE / "planes_f.bfg1", ScalarFieldGrid(g, g.mesh()[2]))


if __name__ == "__main__":
    main()
