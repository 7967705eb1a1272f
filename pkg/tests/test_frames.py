import numpy as np
import pytest

from beltrami.errors import AmbiguousPrincipalDirections, GradientTooSmall
from beltrami.expr import parse, sample
from beltrami.frames import (
    Umbilic,
    adapted_frame,
    frame_invariants,
    propagate_signs,
    structure_residual,
    umbilic_classify,
)
from beltrami.grid import ScalarFieldGrid, gradient

from conftest import box, slope

CYL_BOX = ((0.5, 0.5, 0.0), (1.5, 1.5, 1.0))


def _field(text, lo, hi, n=17, coords="cartesian"):
    return sample(parse(text), box(lo, hi, n, coords))


def _check_frame(fr, f):
    assert fr.orthonormality_error() <= 1e-8
    assert fr.min_determinant() > 0
    gf = gradient(f, 4).values
    cr = np.cross(fr.e3.values, gf, axis=0)
    assert np.max(np.abs(cr)) <= 1e-8 * np.max(np.abs(gf))


def test_planes_frame_and_invariants():
    f = _field("z", (0, 0, 0), (1, 1, 1))
    fr = adapted_frame(f)
    _check_frame(fr, f)
    np.testing.assert_allclose(fr.e3.values[2], 1.0, atol=1e-12)
    assert np.max(np.abs(fr.e1.values[2])) <= 1e-12 and np.max(np.abs(fr.e2.values[2])) <= 1e-12
    inv = frame_invariants(f, fr)
    for name, fld in inv.fields().items():
        assert fld.sup() <= 1e-10, name
    assert umbilic_classify(inv) is Umbilic.TOTALLY_UMBILIC
    assert structure_residual(fr, inv).sup() <= 1e-10


def test_planes_demanding_principal_directions_fails():
    f = _field("z", (0, 0, 0), (1, 1, 1))
    with pytest.raises(AmbiguousPrincipalDirections):
        adapted_frame(f, principal=True)


def test_constant_field_has_no_frame():
    g = box((0, 0, 0), (1, 1, 1), 9)
    with pytest.raises(GradientTooSmall):
        adapted_frame(ScalarFieldGrid(g, np.ones(g.dims)))


def _cylinder_invariants(n, ordering="ascending"):
    f = _field("sqrt(x^2 + y^2)", *CYL_BOX, n=n)
    fr = adapted_frame(f, ordering=ordering)
    return f, fr, frame_invariants(f, fr)


def test_cylinder_principal_directions():
    f, fr, inv = _cylinder_invariants(17)
    _check_frame(fr, f)
    X, Y, _ = f.grid.mesh()
    r = np.hypot(X, Y)
    # ascending: e1 along the circles, e2 along the axis
    along = np.abs(fr.e1.values[0] * (-Y / r) + fr.e1.values[1] * (X / r))
    assert np.min(along) >= 1 - 1e-6
    assert np.min(np.abs(fr.e2.values[2])) >= 1 - 1e-6
    assert not fr.seam


def test_cylinder_coefficients_converge():
    errs = []
    for n in (17, 33):
        f, fr, inv = _cylinder_invariants(n)
        r = f.grid.bindings()["r"]
        e = [np.max(np.abs(inv.h11.values + 1 / r))]
        e += [getattr(inv, k).sup() for k in ("h12", "h22", "k1", "k2", "k3", "g1", "g2", "g3")]
        errs.append(max(e))
        assert umbilic_classify(inv) is Umbilic.NO_UMBILIC_POINTS
    h = 1.0 / 16
    assert errs[0] <= 20 * h * h
    assert slope(*errs) >= 1.9


def test_descending_order_puts_zero_curvature_first():
    f, fr, inv = _cylinder_invariants(17, "descending")
    r = f.grid.bindings()["r"]
    h = 1.0 / 16
    assert inv.h11.sup() <= 20 * h * h
    assert np.max(np.abs(inv.h22.values + 1 / r)) <= 20 * h * h


def test_swapped_frame_exchanges_h11_and_h22():
    f, fr, inv = _cylinder_invariants(17)
    inv2 = frame_invariants(f, fr.swapped())
    np.testing.assert_allclose(inv2.h11.values, inv.h22.values, atol=1e-12)
    np.testing.assert_allclose(inv2.h22.values, inv.h11.values, atol=1e-12)
    assert fr.swapped().min_determinant() > 0


def test_cylinder_structure_residual_converges():
    res = []
    for n in (17, 33):
        _, fr, inv = _cylinder_invariants(n)
        res.append(structure_residual(fr, inv).sup())
    assert res[0] <= 20 / 16**2
    assert res[1] <= 1e-10 or slope(*res) >= 1.9


def test_theta_completion_frame():
    f = _field("atan(y/x)", (0.5, 0.0, 0.0), (1.5, 1.0, 1.0), n=17)
    fr = adapted_frame(f, principal=False)
    _check_frame(fr, f)
    inv = frame_invariants(f, fr)
    r = f.grid.bindings()["r"]
    h = 1.0 / 16
    assert inv.h11.sup() <= 20 * h * h and inv.h22.sup() <= 20 * h * h
    assert np.max(np.abs(inv.g2.values - 1 / r)) <= 20 * h * h


def test_ellipsoid_principal_frame_diagonalizes_shape_operator():
    lo, hi = (0.5, 0.5, 0.5), (1.0, 1.0, 1.0)
    f = _field("x^2 + 2*y^2 + 3*z^2", lo, hi, n=33)
    fr = adapted_frame(f)
    _check_frame(fr, f)
    X, Y, Z = f.grid.mesh()
    # analytic shape operator -D e3 = -(I - n n^T) Hess f / |grad f| on the tangent plane
    grad = np.stack([2 * X, 4 * Y, 6 * Z])
    mag = np.sqrt(np.sum(grad**2, axis=0))
    n = grad / mag
    Hd = np.array([2.0, 4.0, 6.0])
    e1, e2 = fr.e1.values, fr.e2.values

    def S(a, b):
        # <a, S b> with S = -(Hess f)/|grad f| projected; a, b tangent
        return -np.sum(a * Hd[:, None, None, None] * b, axis=0) / mag

    off = np.abs(S(e1, e2))
    inner = (slice(2, -2),) * 3
    assert np.max(off[inner]) <= 20 * (0.5 / 32) ** 2
    # descending order
    assert np.all(S(e1, e1)[inner] >= S(e2, e2)[inner])
    assert np.max(np.abs(np.sum(n * e1, axis=0))) <= 1e-8


def test_rotating_an_umbilic_frame_keeps_h11_h22():
    f = _field("sqrt(x^2 + y^2 + z^2)", (1, 1, 1), (1.5, 1.5, 1.5), n=17)
    fr = adapted_frame(f, principal=False)
    inv = frame_invariants(f, fr)
    inv2 = frame_invariants(f, fr.rotated(0.7))
    assert umbilic_classify(inv, 1e-4) is Umbilic.TOTALLY_UMBILIC
    h = 0.5 / 16
    assert np.max(np.abs(inv2.h11.values - inv.h11.values)) <= 20 * h * h
    assert np.max(np.abs(inv2.h22.values - inv.h22.values)) <= 20 * h * h
    rho = f.values
    assert np.max(np.abs(inv.h11.values + 1 / rho)) <= 20 * h * h


def test_principal_frame_has_small_h12():
    f = _field("x^2 + 2*y^2 + 3*z^2", (0.5, 0.5, 0.5), (1, 1, 1), n=17)
    inv = frame_invariants(f, adapted_frame(f))
    assert inv.h12.sup() <= 10 * 20 * (0.5 / 16) ** 2


def test_sign_propagation_is_continuous_and_deterministic():
    rng = np.random.default_rng(0)
    base = np.zeros((3, 7, 6, 5))
    base[0] = 1.0
    flips = rng.choice([-1.0, 1.0], size=(7, 6, 5))
    fixed, seam = propagate_signs(base * flips)
    assert not seam
    assert np.all(fixed[0] == fixed[0, 1, 0, 0])
    again, _ = propagate_signs(base * flips)
    assert np.array_equal(fixed, again)


def test_mixed_umbilic_type():
    f = _field("z - 0.3*x^3", (-0.5, 0, 0), (0.5, 1, 1), n=17)
    fr = adapted_frame(f, principal=False)
    inv = frame_invariants(f, fr)
    assert umbilic_classify(inv, 1e-4) is Umbilic.MIXED
    with pytest.raises(AmbiguousPrincipalDirections):
        adapted_frame(f)


def test_cylindrical_grid_frame_of_r():
    f = _field("r", (0.5, 0.0, 0.0), (1.5, 1.0, 1.0), n=17, coords="cylindrical_rz")
    fr = adapted_frame(f, ordering="ascending")
    _check_frame(fr, f)
    inv = frame_invariants(f, fr)
    r = f.grid.bindings()["r"]
    assert np.max(np.abs(inv.h11.values + 1 / r)) <= 1e-10
    assert inv.h22.sup() <= 1e-10
