import numpy as np
import pytest

from beltrami.cauchy import CauchySlice, march, recover_f, strong_factor
from beltrami.errors import BlowUp, GridError, U3Vanished
from beltrami.grid import Grid, VectorFieldGrid


def _abc(A=1.0, B=1.0, C=0.5, c=1.0):
    def fn(x, y, z):
        return (A * np.sin(c * z) + C * np.cos(c * y),
                B * np.sin(c * x) + A * np.cos(c * z),
                C * np.sin(c * y) + B * np.cos(c * x))
    return fn


def test_march_reproduces_the_abc_flow():
    fn = _abc()
    res = march(CauchySlice.sample(fn, 64), depth=0.2, steps=40)
    assert res.mode == "constant"
    assert res.factor == pytest.approx(1.0, abs=1e-10)
    X, Y, Z = res.field.grid.mesh()
    exact = np.stack(fn(X, Y, Z))
    assert np.max(np.abs(res.field.values - exact)) <= 1e-4
    f = recover_f(res.field, spectral=True)
    assert np.max(np.abs(f.values - 1.0)) <= 1e-6


def test_general_mode_on_the_same_flow():
    fn = _abc()
    res = march(CauchySlice.sample(fn, 32), depth=0.05, steps=10, mode="general")
    assert res.mode == "general" and res.factor is None
    X, Y, Z = res.field.grid.mesh()
    assert np.max(np.abs(res.field.values - np.stack(fn(X, Y, Z)))) <= 1e-4


def test_output_grid_layout():
    sl = CauchySlice.sample(_abc(), 16, x3=0.3)
    res = march(sl, depth=0.1, steps=8)
    g = res.field.grid
    assert g.dims == (16, 16, 9)
    assert g.origin[2] == 0.3
    assert g.spacing[2] == pytest.approx(0.1 / 8)
    assert np.array_equal(res.field.values[..., 0], np.stack([sl.u1, sl.u2, sl.u3]))


def test_strong_factor_finds_the_wavenumber():
    assert strong_factor(CauchySlice.sample(_abc(c=2.0), 32)) == pytest.approx(2.0, abs=1e-10)
    rng = np.random.default_rng(1)
    noise = CauchySlice(*(rng.normal(size=(16, 16)) + 3 for _ in range(3)))
    assert strong_factor(noise) is None


def test_vertical_uniform_field():
    sl = CauchySlice.sample(lambda x, y, z: (0 * x, 0 * x, 1 + 0 * x), 8)
    res = march(sl, depth=0.1, steps=4)
    assert res.factor == 0.0
    assert np.allclose(res.field.values[2], 1.0) and np.allclose(res.field.values[:2], 0.0)
    assert recover_f(res.field, spectral=True).sup() == 0.0


def test_zero_data_marches_to_zero():
    z = np.zeros((8, 8))
    res = march(CauchySlice(z, z, z), depth=0.1, steps=4)
    assert res.mode == "zero"
    assert res.field.sup() == 0.0


def test_vanishing_third_component():
    sl = CauchySlice.sample(lambda x, y, z: (1 + 0 * x, 0 * x, 0 * x), 8)
    with pytest.raises(U3Vanished):
        march(sl)
    # the ABC slice with A = B = C = 1 has u3 = 0 on the lattice
    with pytest.raises(U3Vanished):
        march(CauchySlice.sample(_abc(C=1.0), 64, origin=(0.0, 0.0)))


def test_blow_up_detection():
    z = np.ones((8, 8))
    bad = z.copy()
    bad[2, 3] = np.nan
    with pytest.raises(BlowUp):
        march(CauchySlice(bad, z, z))
    # a bound below the initial norm trips on the first step
    with pytest.raises(BlowUp):
        march(CauchySlice.sample(_abc(), 16), blowup=0.5)


def test_argument_checks():
    sl = CauchySlice.sample(_abc(), 8)
    with pytest.raises(ValueError):
        march(sl, mode="spectral")
    with pytest.raises(GridError):
        march(sl, steps=3)
    with pytest.raises(ValueError):
        march(sl, filter_frac=0.0)
    with pytest.raises(GridError):
        CauchySlice(np.zeros((4, 4)), np.zeros((4, 5)), np.zeros((4, 4)))


def test_slice_round_trip_through_a_field():
    sl = CauchySlice.sample(_abc(), 8, x3=0.25)
    back = CauchySlice.from_field(sl.to_field())
    for a, b in ((sl.u1, back.u1), (sl.u2, back.u2), (sl.u3, back.u3)):
        assert np.array_equal(a, b)
    assert back.lengths == pytest.approx(sl.lengths) and back.x3 == 0.25


def test_recover_f_with_finite_differences():
    g = Grid.box((0.1, 0.1, 0.0), (1.1, 1.1, 1.0), (33, 33, 33))
    X, Y, Z = g.mesh()
    u = VectorFieldGrid(g, np.stack(_abc(C=2.0)(X, Y, Z)))
    f = recover_f(u, order=4)
    assert np.max(np.abs(f.values - 1.0)) <= 1e-5
