import math

import numpy as np
import pytest

from revconvex.classify import (
    BOUNDARY,
    INSIDE,
    N0,
    N1,
    N2,
    OUTSIDE,
    ConeRestrictedBody,
    apex_location,
    check_assumption1,
    check_assumption2,
    classify_rays,
)
from revconvex.convexbody import Ball
from revconvex.polyhedron import orthant_cone

SQ2, SQ3 = math.sqrt(2.0), math.sqrt(3.0)


def test_example1_table(classified):
    c = classified[1]
    assert c.apex == OUTSIDE
    assert c.tags == (N2, N1)
    assert c.lambda1 == pytest.approx([1 - SQ2 / 2, 0.5], abs=1e-12)
    assert c.lambda2[0] == pytest.approx(1 + SQ2 / 2, abs=1e-12)
    assert c.lambda2[1] == math.inf


def test_example2_first_basis(classified):
    c = classified[2]
    assert np.allclose(c.cone.apex_y, [-1.5, 0])
    assert c.tags == (N2, N2)
    # ray (3, 1) from (-1.5, 0): |(-1.5 + 3t, t)| = 1  ->  10t^2 - 9t + 1.25 = 0
    disc = math.sqrt(81 - 50)
    assert c.lambda1[0] == pytest.approx((9 - disc) / 20, abs=1e-12)
    assert c.lambda2[0] == pytest.approx((9 + disc) / 20, abs=1e-12)
    assert (c.lambda1[1], c.lambda2[1]) == pytest.approx((0.5, 2.5), abs=1e-12)


def test_example2_other_bases_are_inside(fixtures):
    for B in ((1,), (2,)):
        assert fixtures[2].classify(B).apex == INSIDE


def test_example3_all_recede(classified):
    c = classified[3]
    assert c.tags == (N1, N1)
    assert c.lambda1 == pytest.approx([1.0, 1.0])


def test_example4_assumption1_fails_at_column_2(classified):
    c = classified[4]
    assert c.tags == (N2, N0)
    assert tuple(c.lambda1[:1]) + tuple(c.lambda2[:1]) == pytest.approx((1.0, 3.0))
    a1 = check_assumption1(c)
    assert not a1 and c.cone.label(a1.witness) == 2


def test_example5_partition_and_assumptions(classified):
    c = classified[5]
    assert c.N0 == (1,) and c.N2 == (0,)
    assert c.lambda1[0] == pytest.approx(0.75 - SQ3 / 4, abs=1e-8)
    assert not check_assumption1(c)
    assert check_assumption2(c.cone, c.body)


def test_example6_assumption2_fails(classified):
    c = classified[6]
    assert c.tags == (N2, N1)
    a2 = check_assumption2(c.cone, c.body)
    assert not a2
    w = np.asarray(a2.witness)
    # the witness is a recession direction with a negative first coordinate
    assert c.body.recession_cone().member(w) and w[0] < 0


def test_apex_locations():
    b = Ball([0, 0], 1.0)
    assert apex_location(b, [0, 0]) == INSIDE
    assert apex_location(b, [1, 0]) == BOUNDARY
    assert apex_location(b, [2, 0]) == OUTSIDE


def test_inside_apex_sets_lambda1_to_zero():
    c = classify_rays(orthant_cone(2), Ball([0.2, 0.2], 1.0))
    assert c.apex == INSIDE and np.all(c.lambda1 == 0.0)


def test_cone_restriction_repairs_assumption2(classified):
    c = classified[6]
    restricted = ConeRestrictedBody(c.body, c.cone)
    assert check_assumption2(c.cone, restricted)
    # restricted body agrees with the original inside the cone
    for y in ([1.0, 0.2], [0.5, 2.0], [3.0, 1.0]):
        assert (restricted.level(y) < 0) == (c.body.level(y) < 0)
