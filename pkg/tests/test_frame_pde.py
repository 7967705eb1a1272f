import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from beltrami.errors import DomainError, IncompatibleInitialData, StepOutOfDomain
from beltrami.expr import parse, sample
from beltrami.frame_pde import (
    TangentialField,
    cylinder_ode_at,
    cylinder_ode_solve,
    evolve_level_surfaces,
    system_residual,
    trace_normal_lines,
)
from beltrami.frames import adapted_frame, frame_invariants
from beltrami.grid import ScalarFieldGrid, curl, divergence

from conftest import box


def _planes(n=17):
    g = box((0, 0, 0), (1, 1, 1), n)
    f = sample(parse("z"), g)
    return g, f, frame_invariants(f, adapted_frame(f))


def _rotating_pair(X, Y, Z):
    # the (x, -y) data carried along z by a rotation through z^2/2
    p = 0.5 * Z * Z
    return X * np.cos(p) - Y * np.sin(p), -(X * np.sin(p) + Y * np.cos(p))


def _tf(g, u1, u2):
    return TangentialField(ScalarFieldGrid(g, u1), ScalarFieldGrid(g, u2))


def test_planes_closed_form_solves_the_system():
    g, f, inv = _planes(33)
    tf = _tf(g, *_rotating_pair(*g.mesh()))
    h = g.min_spacing()
    for R in system_residual(tf, inv, f):
        assert R.sup() <= 20 * h * h
    # and the assembled vector field is Beltrami with factor z
    u = tf.vector(inv.frame)
    assert (curl(u, 4) - u * f.values).sup() <= 20 * h * h
    assert divergence(u, 4).sup() <= 20 * h * h


def test_zero_data_has_zero_residual():
    g, f, inv = _planes(9)
    z = np.zeros(g.dims)
    assert all(R.sup() == 0.0 for R in system_residual(_tf(g, z, z), inv, f))


def test_lundquist_field_in_the_radial_frame():
    c = 1.3
    g = box((0.5, -0.5, 0.5), (1.5, 0.5, 1.5), 33)
    X, Y, Z = g.mesh()
    r = np.hypot(X, Y)
    fr_src = sample(parse("sqrt(x^2+y^2)"), g)
    inv = frame_invariants(fr_src, adapted_frame(fr_src, ordering="ascending"))
    j1, j0 = special.j1(c * r), special.j0(c * r)
    u = np.stack([-j1 * Y / r, j1 * X / r, j0])
    e1, e2, _ = inv.frame.vectors()
    tf = _tf(g, np.sum(u * e1.values, axis=0), np.sum(u * e2.values, axis=0))
    fc = ScalarFieldGrid(g, np.full(g.dims, c))
    h = g.min_spacing()
    for R in system_residual(tf, inv, fc):
        assert R.sup() <= 20 * h * h


def test_evolution_matches_closed_form_on_planes():
    g, f, inv = _planes(33)
    res = evolve_level_surfaces(lambda x, y, z: (x, -y), inv, f, 1.5)
    assert res.compatible
    U1, U2 = _rotating_pair(*g.mesh())
    m = res.mask
    assert np.all(m)
    err = max(np.max(np.abs(res.field.u1.values - U1)), np.max(np.abs(res.field.u2.values - U2)))
    assert err <= 1e-6
    np.testing.assert_allclose(res.arc_length[:, :, -1], 1.0, atol=1e-12)


def test_sampled_initial_field_is_accepted():
    g, f, inv = _planes(17)
    X, Y, _ = g.mesh()
    res = evolve_level_surfaces(_tf(g, X, -Y), inv, f, 1.5)
    assert res.compatible and res.compatibility_residual <= 20 * g.min_spacing() ** 2


coef = st.floats(-3, 3, allow_nan=False)


@given(coef, coef)
def test_transport_is_linear(a, b):
    g, f, inv = _planes(9)
    tr = trace_normal_lines(inv, f, 1.5)

    def u(x, y, z):
        return x, -y

    def v(x, y, z):
        return np.sin(x) * np.cosh(y), np.cos(x) * np.sinh(y)

    def w(x, y, z):
        p, q = u(x, y, z), v(x, y, z)
        return a * p[0] + b * q[0], a * p[1] + b * q[1]

    lhs = tr.apply(w)
    rhs = tr.apply(u).scaled(a) + tr.apply(v).scaled(b)
    scale = max(abs(a) + abs(b), 1.0) * 2.0
    assert (lhs.u1 - rhs.u1).sup() <= 1e-10 * scale
    assert (lhs.u2 - rhs.u2).sup() <= 1e-10 * scale


def test_zero_initial_data_stays_zero():
    g, f, inv = _planes(9)
    res = evolve_level_surfaces(lambda x, y, z: (0.0, 0.0), inv, f, 1.5)
    assert res.field.u1.sup() == 0.0 and res.field.u2.sup() == 0.0
    assert res.amplification == 1.0


def test_incompatible_initial_data_is_refused():
    g, f, inv = _planes(9)
    with pytest.raises(IncompatibleInitialData):
        evolve_level_surfaces(lambda x, y, z: (x, y), inv, f, 1.5)


@pytest.mark.parametrize("arc", [0.0, -1.0, np.inf])
def test_bad_arc_range(arc):
    g, f, inv = _planes(9)
    with pytest.raises(StepOutOfDomain):
        trace_normal_lines(inv, f, arc)


def test_unreachable_level():
    g, f, inv = _planes(9)
    with pytest.raises(StepOutOfDomain):
        trace_normal_lines(inv, f, 1.0, level=-5.0)


def test_partial_arc_covers_a_slab():
    g, f, inv = _planes(9)
    tr = trace_normal_lines(inv, f, 0.5)
    Z = g.mesh()[2]
    # the z = 0.5 layer sits on the arc limit and may fall either side
    assert np.all(tr.mask[Z < 0.49]) and not np.any(tr.mask[Z > 0.51])


# ----------------------------------------------------------------------------
# cylinder ODE

def test_cylinder_ode_without_coupling():
    # phi = 0: u1 = u1(r0) r0 / r, u2 constant
    sol = cylinder_ode_solve("0", 0.5, (2.0, -1.0), 3.0)
    np.testing.assert_allclose(sol.u1, 2.0 * 0.5 / sol.r, rtol=1e-10)
    np.testing.assert_allclose(sol.u2, -1.0)


def test_cylinder_ode_lands_on_endpoint():
    sol = cylinder_ode_solve("1", 0.7, (1.0, 0.0), 1.2345, step=0.01)
    assert sol.r[-1] == 1.2345 and sol.r[0] == 0.7
    steps = np.diff(sol.r)
    assert np.allclose(steps, steps[0])
    back = cylinder_ode_solve("1", 0.7, (1.0, 0.0), 0.3, step=0.01)
    assert back.r[-1] == 0.3


def test_cylinder_ode_bessel_solution():
    c = 1.5
    r0 = 0.4
    sol = cylinder_ode_solve(str(c), r0, (special.j1(c * r0), special.j0(c * r0)), 5.0)
    assert np.max(np.abs(sol.u1 - special.j1(c * sol.r))) <= 1e-8
    assert np.max(np.abs(sol.u2 - special.j0(c * sol.r))) <= 1e-8


def test_cylinder_ode_at_matches_trajectory():
    radii = np.array([0.6, 1.0, 2.2])
    got = cylinder_ode_at("1 + 0.5*sin(r)", 1.0, (0.3, 0.8), radii)
    for k, r in enumerate(radii):
        sol = cylinder_ode_solve("1 + 0.5*sin(r)", 1.0, (0.3, 0.8), r)
        assert abs(got[0][k] - sol.u1[-1]) <= 1e-8
        assert abs(got[1][k] - sol.u2[-1]) <= 1e-8


def test_cylinder_ode_domain_errors():
    with pytest.raises(DomainError):
        cylinder_ode_solve("1", 0.0, (1, 0), 1.0)
    with pytest.raises(DomainError):
        cylinder_ode_solve("1", 1.0, (1, 0), -1.0)
    with pytest.raises(ValueError):
        cylinder_ode_solve("z", 1.0, (1, 0), 2.0)
