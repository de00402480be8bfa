import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from revconvex.polyhedron import (
    Basis,
    InequalitySystem,
    LinearCut,
    LiftingError,
    StructuralError,
    cone_rays,
    enumerate_bases,
    lift_cut,
    orthant_cone,
    standard_form,
    to_standard_form,
)


def example2_polyhedron():
    return to_standard_form(InequalitySystem.make([[-1, 3]], [1.5]))


def test_standard_form_adds_slacks():
    P = example2_polyhedron()
    assert P.A.tolist() == [[-1.0, 3.0, 1.0]]
    assert P.n == 3 and P.m == 1
    assert P.to_original().shape == (2, 3)


def test_free_variables_are_split():
    P = to_standard_form(InequalitySystem.make([[1, 1]], [2], nonneg=[True, False]))
    assert P.n == 4
    z = np.array([1.0, 0.0, 2.0, 3.0])
    assert np.allclose(P.to_original() @ z, [1.0, -2.0])


def test_no_rows_rejected():
    with pytest.raises(StructuralError):
        to_standard_form(InequalitySystem.make(np.zeros((0, 2)), [], n=2))


def test_rank_deficient_rejected():
    with pytest.raises(StructuralError):
        standard_form([[1, 1], [2, 2]], [1, 2])


def test_example2_basis_cone():
    cone = cone_rays(example2_polyhedron(), Basis.of((0,), 3))
    assert np.allclose(cone.apex_y, [-1.5, 0])
    assert np.allclose(cone.rays_y, [[3, 1], [1, 0]])
    assert [cone.label(j) for j in range(cone.size)] == [2, 3]


def test_coord_map_round_trip():
    P = example2_polyhedron()
    for B in enumerate_bases(P, 10):
        cone = cone_rays(P, B)
        u = np.array([0.3, 1.7])
        assert np.allclose(cone.coords(cone.point(u)), u)


def test_as_system_is_the_cone():
    cone = cone_rays(example2_polyhedron(), Basis.of((0,), 3))
    assert cone.as_system().member(cone.point([0.0, 2.0]))
    assert not cone.as_system().member(cone.point([-0.1, 2.0]))


def test_lifted_cut_agrees_on_points():
    cone = cone_rays(example2_polyhedron(), Basis.of((0,), 3))
    cut = LinearCut(np.array([0.4, 0.5]), ">=", 1.0)
    lifted = lift_cut(cut, cone)
    for u in ([0, 0], [1, 2], [3, 0.5]):
        y = cone.point(np.array(u, dtype=float))
        assert float(cut.violation(np.array(u, dtype=float))) == pytest.approx(float(lifted.violation(y)))


def test_lifting_through_inverse_when_free_var_is_nonbasic():
    P = to_standard_form(InequalitySystem.make([[1, 1], [1, -1]], [2, 0], nonneg=[False, True]))
    # basic: both slacks; nonbasic: the split parts of x1 and x2 -> rays not square
    cone = cone_rays(P, Basis.of((3, 4), P.n))
    with pytest.raises(LiftingError):
        cone.coord_map()


def test_orthant_cone_is_identity():
    c = orthant_cone(3)
    L, l = c.coord_map()
    assert np.array_equal(L, np.eye(3)) and not l.any()


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_random_bases_reconstruct_points(seed):
    rng = np.random.default_rng(seed)
    C = rng.integers(-3, 4, size=(2, 3)).astype(float)
    P = to_standard_form(InequalitySystem.make(C, rng.integers(1, 5, size=2).astype(float)))
    for B in enumerate_bases(P, 4):
        cone = cone_rays(P, B)
        z = cone.apex + cone.rays @ np.ones(cone.size)
        assert np.allclose(P.A @ z, P.b)
