import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from phplate.basis import BasisSet, SideTraceSpace, TensorSpace
from phplate.mesh import SIDES, Mesh1D, Mesh2D, side_normal, side_tangent
from phplate.shapes import gauss_unit, hermite_cubic


def test_mesh1d_nodes_and_validation():
    m = Mesh1D(2.0, 4)
    assert_allclose(m.nodes, [0, 0.5, 1, 1.5, 2])
    assert m.h == 0.5 and m.n_nodes == 5
    with pytest.raises(ValueError):
        Mesh1D(1.0, 0)
    with pytest.raises(ValueError):
        Mesh1D(0.0, 3)


def test_mesh2d_counts():
    m = Mesh2D(2.0, 1.0, 4, 3)
    assert m.n_nodes == 20 and m.n_elements == 12
    assert_allclose([m.hx, m.hy, m.area], [0.5, 1 / 3, 2.0])


@pytest.mark.parametrize("side", SIDES)
def test_normals_and_tangents(side):
    n, s = side_normal(side), side_tangent(side)
    assert_allclose(np.hypot(*n), 1.0)
    assert_allclose(s, [-n[1], n[0]])


def test_side_normal_rejects_bad_input():
    with pytest.raises(ValueError):
        side_normal("front")
    with pytest.raises(ValueError):
        side_normal((1.0, 1.0))


def test_sides_run_counter_clockwise():
    m = Mesh2D(2.0, 1.0, 2, 2)
    for side in SIDES:
        x0, y0 = m.side_point(side, 0.0)
        x1, y1 = m.side_point(side, m.side_length(side))
        assert_allclose(np.array([x1 - x0, y1 - y0]) / m.side_length(side), side_tangent(side))


def test_hermite_cubic_nodal_values():
    h = 0.7
    t = np.array([0.0, 1.0])
    assert_allclose(hermite_cubic(t, h), [[1, 0, 0, 0], [0, 0, 1, 0]], atol=1e-15)
    assert_allclose(hermite_cubic(t, h, 1), [[0, 1, 0, 0], [0, 0, 0, 1]], atol=1e-14)


def test_gauss_rule_exact_for_degree_7():
    x, w = gauss_unit(4)
    assert_allclose(w.sum(), 1.0)
    assert_allclose(w @ x**7, 1 / 8)


def test_unknown_space():
    with pytest.raises(ValueError):
        TensorSpace(Mesh2D(1, 1, 1, 1), "p5")


@pytest.mark.parametrize("kind", ["q2", "dq3"])
def test_partition_of_unity(kind, rng):
    space = TensorSpace(Mesh2D(1.0, 2.0, 3, 2), kind)
    x, y = rng.uniform(0, 1, 50), rng.uniform(0, 2, 50)
    assert_allclose(space.evaluate(np.ones(space.n_dofs), x, y), 1.0, rtol=1e-13)


def test_bfs_reproduces_bicubics(rng):
    space = TensorSpace(Mesh2D(1.0, 1.0, 3, 3), "bfs")
    c = rng.standard_normal((4, 4))
    P = np.polynomial.polynomial
    f = lambda x, y: P.polyval2d(x, y, c)  # noqa: E731
    cx, cy = P.polyder(c, axis=0), P.polyder(c, axis=1)
    cxy = P.polyder(cx, axis=1)
    coef = space.interpolate(f, lambda x, y: P.polyval2d(x, y, cx),
                             lambda x, y: P.polyval2d(x, y, cy), lambda x, y: P.polyval2d(x, y, cxy))
    x, y = rng.uniform(0, 1, 40), rng.uniform(0, 1, 40)
    assert_allclose(space.evaluate(coef, x, y), f(x, y), atol=1e-12)
    assert_allclose(space.evaluate(coef, x, y, 1, 1), P.polyval2d(x, y, cxy), atol=1e-11)


def test_bfs_interpolation_requires_derivatives():
    with pytest.raises(ValueError):
        TensorSpace(Mesh2D(1, 1, 1, 1), "bfs").interpolate(lambda x, y: x)


@given(st.integers(0, 2**32 - 1))
def test_bfs_is_c1_across_interior_edges(seed):
    rng = np.random.default_rng(seed)
    m = Mesh2D(1.0, 1.0, 3, 2)
    space = TensorSpace(m, "bfs")
    c = rng.standard_normal(space.n_dofs)
    eps = 1e-12
    y = rng.uniform(0, 1, 5)
    for xe in (1 / 3, 2 / 3):
        for d in ((0, 0), (1, 0), (0, 1)):
            left = space.evaluate(c, np.full(5, xe - eps), y, *d)
            right = space.evaluate(c, np.full(5, xe + eps), y, *d)
            assert_allclose(left, right, atol=1e-9)
    x = rng.uniform(0, 1, 5)
    for d in ((0, 0), (1, 0), (0, 1)):
        assert_allclose(space.evaluate(c, x, np.full(5, 0.5 - eps), *d),
                        space.evaluate(c, x, np.full(5, 0.5 + eps), *d), atol=1e-9)


def test_essential_dofs():
    space = TensorSpace(Mesh2D(1.0, 1.0, 2, 2), "bfs")
    assert space.essential_dofs("bottom", "clamped").size == 12
    # value and d/dx on the bottom side
    assert_allclose(space.essential_dofs("bottom", "simply_supported") % 4, [0, 1] * 3)
    with pytest.raises(ValueError):
        space.essential_dofs("bottom", "free")
    with pytest.raises(ValueError):
        TensorSpace(Mesh2D(1, 1, 1, 1), "q2").essential_dofs("bottom", "clamped")


def test_trace_space_layout():
    tr = SideTraceSpace(Mesh2D(1.0, 1.0, 2, 3))
    assert tr.n_dofs == 2 * (3 + 4 + 3 + 4)
    c = tr.constant("right", 2.0)
    assert c.sum() == 2.0 * 4
    assert_allclose(tr.segment_dofs("right", 1), tr.offsets["right"] + np.arange(2, 6))


def test_basis_set_families():
    m = Mesh2D(1, 1, 2, 2)
    assert BasisSet.force_control(m).curvature.kind == "dq3"
    assert BasisSet.force_control(m, "q2").curvature.continuity == "C0"
    assert BasisSet.kinematic_control(m).curvature.continuity == "C1"
