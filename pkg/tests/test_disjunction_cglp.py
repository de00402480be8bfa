import numpy as np
import pytest

from revconvex.convexbody import PreconditionError
from revconvex.disjunction_cglp import (
    boundary_case,
    build_multiterm,
    build_two_term,
    cglp_separate,
    union_contains,
)
from revconvex.instance import parse_instance
from revconvex.verify import certify_cut

ORTHANT = {"ineq": {"C": [], "d": [], "nonneg": [True, True]}}


def test_example2_cglp_recovers_external_cut(classified):
    terms = build_two_term(classified[2])
    assert [t.label for t in terms] == ["right"]
    cut = cglp_separate(terms, [0.3, 0.2])
    assert cut is not None
    assert cut.violation == pytest.approx(0.245421, abs=1e-5)
    assert cut.alpha / cut.beta == pytest.approx([1.0, 0.4322356], abs=1e-6)
    assert cut.certify(terms) <= 1e-9
    assert certify_cut(terms, cut.as_cut()) >= -1e-6


def test_example1_point_in_hull_is_not_cut(classified):
    # (0.9, 0.4) = 0.55 (0, 0.4) + 0.45 (2, 0.4), both points of P minus C
    terms = build_two_term(classified[1])
    assert cglp_separate(terms, [0.9, 0.4]) is None
    body = classified[1].body
    assert body.level([0, 0.4]) > 0 and body.level([2, 0.4]) > 0


def test_example1_hull_is_the_orthant(classified):
    # the right term recedes along x2 and both terms touch x2 = 0, so the
    # closed hull of the union is all of R^2_+ and nothing can be cut
    terms = build_two_term(classified[1])
    for x in ([1.0, 0.2], [1.0, 0.0], [0.5, 3.0]):
        assert cglp_separate(terms, x) is None


def test_point_of_reverse_convex_set_never_cut(classified):
    terms = build_two_term(classified[1])
    assert cglp_separate(terms, [3.0, 0.0]) is None


def test_example5_multiterm_terms(classified):
    rep = build_multiterm(classified[5])
    assert [t.label for t in rep.terms] == ["S0", "S1"]
    assert "S1" in rep.apex_cuts
    assert union_contains(rep.terms, np.array([0.0, 3.0]))
    assert not union_contains(rep.terms, np.array([1.0, 0.1]))


def test_example5_candidate_not_separable(classified):
    # (0, 1) lies in the S0 term itself, so no cut exists
    rep = build_multiterm(classified[5])
    assert union_contains(rep.terms[:1], np.array([0.0, 1.0]))
    assert cglp_separate(rep.terms, [0.0, 1.0]) is None


def test_candidate_dimension_checked(classified):
    with pytest.raises(PreconditionError):
        cglp_separate(build_two_term(classified[2]), [0.1, 0.2, 0.3])


def test_boundary_apex_adds_point_term():
    inst = parse_instance({"polyhedron": ORTHANT, "body": {"kind": "ball", "center": [1, 1], "radius": 2 ** 0.5}})
    cls = inst.classify()
    assert cls.apex == "on_boundary"
    terms = boundary_case(cls)
    assert terms[0].label == "point"
    assert union_contains(terms, np.array([0.0, 0.0]))
    assert union_contains(terms, np.array([3.0, 0.0]))


def test_boundary_case_rejects_outside(classified):
    with pytest.raises(PreconditionError):
        boundary_case(classified[1])
