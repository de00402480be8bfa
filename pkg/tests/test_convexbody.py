import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from revconvex.convexbody import (
    INTERVAL_TOL,
    Ball,
    CapabilityError,
    ConeOracle,
    ConvexQuadratic,
    MinkowskiSumWithCone,
    PreconditionError,
    SecondOrderBody,
    StrictHalfspaces,
    ray_interval,
)

SQ2 = math.sqrt(2.0)


def test_ball_interval_closed_form():
    b = Ball([2.0, 0.0], 1.0)
    lo, hi = b.ray_interval([0, 0], [1, 0])
    assert (lo, hi) == pytest.approx((1.0, 3.0), abs=1e-12)
    assert b.ray_interval([0, 0], [0, 1]).empty


def test_ball_from_inside_starts_at_zero():
    lo, hi = Ball([0, 0], 1.0).ray_interval([0.5, 0], [1, 0])
    assert lo == 0.0 and hi == pytest.approx(0.5)


def test_quadratic_parabola_interval():
    # (x1 - 1)^2 - x2 < 1/2 from the origin along each axis
    q = ConvexQuadratic(np.diag([1.0, 0.0]), [-2.0, -1.0], 0.5)
    assert tuple(q.ray_interval([0, 0], [1, 0])) == pytest.approx((1 - SQ2 / 2, 1 + SQ2 / 2), abs=1e-12)
    lo, hi = q.ray_interval([0, 0], [0, 1])
    assert lo == pytest.approx(0.5) and hi == math.inf


def test_quadratic_rejects_indefinite():
    with pytest.raises(ValueError):
        ConvexQuadratic(np.diag([1.0, -1.0]), [0, 0], 0)


def test_halfspaces_interval():
    h = StrictHalfspaces([[-1, -2], [-2, -1]], [-1, -1])
    for r in ([1, 0], [0, 1]):
        lo, hi = h.ray_interval([0, 0], r)
        assert lo == pytest.approx(1.0) and hi == math.inf


def test_soc_interval_and_recession():
    s = SecondOrderBody([[1, 0], [0, 0]], [-1, 1], [0, 1], 1.1)
    lo, hi = s.ray_interval([0, 0], [1, 0])
    # |x1 - 1| < 1.1 - 1 ... after squaring: (x1-1)^2 + 1 < (1.1)^2 along x2 = 0
    r = math.sqrt(1.1**2 - 1)
    assert (lo, hi) == pytest.approx((1 - r, 1 + r), abs=1e-9)
    lo, hi = s.ray_interval([0, 0], [0, 1])
    assert hi == math.inf and lo == pytest.approx(SQ2 - 1.1, abs=1e-9)
    K = s.recession_cone()
    assert K.member([1, 1]) and K.member([0, 1]) and not K.member([1, 0])


def test_soc_rank_two_has_no_polyhedral_recession():
    with pytest.raises(CapabilityError):
        SecondOrderBody(np.eye(2), [0, 0], [0, 1], 1.0).recession_cone()


def test_minkowski_interval_by_bisection():
    body = MinkowskiSumWithCone(Ball([0.75, 0.25], 0.5), ConeOracle.from_generators([[1, 1], [2, 1]]))
    lo, hi = body.ray_interval([0, 0], [1, 0])
    assert lo == pytest.approx(0.75 - math.sqrt(3) / 4, abs=1e-8)
    # the far exit along x2 = 0 is the tangent to the shifted ball along (2, 1)
    t = 0.75 + 0.5 * math.sqrt(5) - 0.25 * 2
    assert hi == pytest.approx(t, abs=1e-7)
    assert body.ray_interval([0, 0], [0, 1]).empty


def test_zero_direction_rejected():
    with pytest.raises(PreconditionError):
        ray_interval(Ball([0, 0], 1), [0, 0], [0, 0])


def test_interior_hint_checked():
    with pytest.raises(ValueError):
        Ball([0, 0], 1.0, interior_hint=np.array([2.0, 0.0]))


def test_cone_oracle_line_sup():
    K = ConeOracle.from_generators([[1, 1], [2, 1]])
    assert K.member([3, 2]) and not K.member([0, 1])
    # from (1, 1) along (0, -1): stays in cone until the (2, 1) edge at x2 = x1/2
    assert K.line_sup([1, 1], [0, -1]) == pytest.approx(0.5, abs=1e-9)
    assert K.line_sup([1, 1], [1, 1]) == math.inf
    H = ConeOracle.from_halfspaces([[1, -1]])
    assert H.line_sup([0, 1], [1, 0]) == pytest.approx(1.0)
    with pytest.raises(PreconditionError):
        H.line_sup([1, 0], [0, 1])


def test_cone_parametrization_describes_cone():
    K = ConeOracle.from_halfspaces([[1, -1]]).plus([[1, 0]])
    D, A_ub, A_eq, lower = K.parametrization()
    assert D.shape == (2, 3) and A_ub.shape[1] == 3 and lower[-1] == 0.0


_bodies = [
    Ball([1.0, 0.5], 0.8),
    ConvexQuadratic(np.array([[2.0, 0.5], [0.5, 1.0]]), [-1, -1], -0.5),
    StrictHalfspaces([[1, 1], [-1, 0], [0, -1]], [2, 0.5, 0.5]),
    SecondOrderBody([[1, 0], [0, 0]], [-1, 1], [0, 1], 1.1),
    MinkowskiSumWithCone(Ball([0.75, 0.25], 0.5), ConeOracle.from_generators([[1, 1], [2, 1]])),
]


@settings(max_examples=100, deadline=None)
@given(
    st.sampled_from(range(len(_bodies))),
    st.tuples(st.floats(-2, 2), st.floats(-2, 2)),
    st.floats(0, 2 * math.pi),
)
def test_interval_endpoints_match_membership(k, origin, angle):
    body = _bodies[k]
    o = np.array(origin)
    r = np.array([math.cos(angle), math.sin(angle)])
    iv = body.ray_interval(o, r)
    delta = 10 * INTERVAL_TOL
    if iv.empty:
        return
    lo, hi = iv
    mid = lo + 1.0 if hi == math.inf else 0.5 * (lo + hi)
    if hi - lo > 4 * delta:
        assert body.level(o + mid * r) < 0
    if lo > delta:
        assert body.level(o + (lo - delta * max(1, lo)) * r) >= -1e-9
    if math.isfinite(hi) and hi - lo > 4 * delta:
        assert body.level(o + (hi + delta * max(1, hi)) * r) >= -1e-9
