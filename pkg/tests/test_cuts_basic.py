import math

import numpy as np
import pytest

from revconvex.classify import N0
from revconvex.convexbody import PreconditionError
from revconvex.cuts_basic import (
    ValidityError,
    external_intersection_cut,
    side_status,
    standard_intersection_cut,
    two_term_disjunction,
    with_emptiness,
)
from revconvex.polyhedron import lift_cut

SQ2 = math.sqrt(2.0)


def test_example1_two_term_coefficients(classified):
    d = two_term_disjunction(classified[1])
    assert d.left.sense == "<=" and d.right.sense == ">="
    assert d.left.coef == pytest.approx([1 / (1 - SQ2 / 2), 2.0])
    assert d.right.coef == pytest.approx([1 / (1 + SQ2 / 2), 0.0])
    assert bool(d.covers(np.array([0.0, 0.0]))) and bool(d.covers(np.array([1 + SQ2 / 2, 0.0])))
    assert not bool(d.covers(np.array([1.0, 0.2])))


def test_example1_both_sides_meet_P(classified):
    d = with_emptiness(classified[1], two_term_disjunction(classified[1]))
    assert d.left_status.state == d.right_status.state == "nonempty"
    res = external_intersection_cut(classified[1])
    assert res.cut is None and "both sides" in res.reason


def test_example2_external_cut(classified):
    res = external_intersection_cut(classified[2])
    assert res.side == "right"
    assert res.disjunction.left_status.state == "empty"
    assert res.disjunction.left_status.certificate is not None
    a, b = res.lifted.coef, res.lifted.rhs
    assert a @ np.array([1.0, 0.0]) == pytest.approx(b, abs=1e-9)
    assert (a / b) == pytest.approx([1.0, 0.4322356], abs=1e-6)


def test_example2_standard_cuts_from_inside_bases(fixtures):
    c1 = fixtures[2].classify((1,))
    cut = lift_cut(standard_intersection_cut(c1), c1.cone)
    assert cut.sense == ">="
    assert np.array(list(cut.coef) + [cut.rhs]) / cut.rhs == pytest.approx([2.5225881, -1.0, 1.0], abs=1e-6)
    c2 = fixtures[2].classify((2,))
    cut = lift_cut(standard_intersection_cut(c2), c2.cone)
    assert np.array(list(cut.coef) + [cut.rhs]) / cut.rhs == pytest.approx([1.0, 1.0, 1.0], abs=1e-9)


def test_standard_cut_needs_inside_apex(classified):
    with pytest.raises(PreconditionError):
        standard_intersection_cut(classified[1])


def test_example3_right_side_symbolically_empty(classified):
    res = external_intersection_cut(classified[3])
    st = res.disjunction.right_status
    assert st.state == "empty" and st.symbolic
    assert res.side == "left"
    assert res.lifted.coef == pytest.approx([1.0, 1.0]) and res.lifted.rhs == pytest.approx(1.0)


def test_example4_refused_with_witness(classified):
    with pytest.raises(ValidityError) as err:
        two_term_disjunction(classified[4])
    assert classified[4].cone.label(err.value.witness) == 2
    d = two_term_disjunction(classified[4], check=False)
    # the missing ray contributes nothing to either side
    assert d.left.coef[1] == 0.0 and d.right.coef[1] == 0.0
    assert classified[4].tags[1] == N0


def test_side_status_witness_is_feasible(classified):
    d = two_term_disjunction(classified[1])
    st = side_status(classified[1], d.right)
    assert st.state == "nonempty"
    u = st.witness[list(classified[1].cone.nonbasic)]
    assert d.right.value(u) >= 1 - 1e-7
