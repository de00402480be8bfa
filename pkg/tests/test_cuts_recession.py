import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from revconvex.convexbody import INF, PreconditionError
from revconvex.cuts_recession import (
    EpsilonTable,
    build_epsilon_table_GD,
    build_epsilon_table_Sk,
    build_extended_formulation,
    build_sk_geometry,
    separate,
    separate_theorem4,
    separate_theorem8,
    sk_apex_cut,
    theorem4_cut,
    theorem8_cut,
)
from revconvex.verify import brute_force_separation, random_table

SQ3 = math.sqrt(3.0)


def test_example5_gd_table(classified):
    t = build_epsilon_table_GD(classified[5])
    assert t.rows == (0,) and t.cols == (1,)
    assert t.eps_hat(0, 1) == pytest.approx(0.75 - SQ3 / 4, abs=1e-8)
    cut = theorem4_cut(t, (0,))
    # (x1 - x2) / lambda1 <= 1, i.e. x1 - x2 <= lambda1
    lam = 0.75 - SQ3 / 4
    assert cut.coef * lam == pytest.approx([1.0, -1.0], abs=1e-7)


def test_example5_sk_geometry_and_cut(classified):
    g = build_sk_geometry(classified[5], 0)
    assert g.J == (1,)
    assert g.lambda_star[0] == pytest.approx(1.3680340, abs=1e-6) and g.lambda_star[1] == INF
    assert not g.assumption3
    t = build_epsilon_table_Sk(classified[5], g)
    assert t.M == (1,) and t.eps_hat(1, 0) == pytest.approx(2.0, abs=1e-9)
    cut = theorem8_cut(t, (1,))
    assert cut.coef == pytest.approx([-0.5, 1.0]) and cut.rhs == 0.0
    apex = sk_apex_cut(g)
    assert apex.coef == pytest.approx([1 / 1.3680340, 0.0], abs=1e-6)


def test_example5_separation_at_0_1(classified):
    t = build_epsilon_table_Sk(classified[5], build_sk_geometry(classified[5], 0))
    res = separate_theorem8(t, [0.0, 1.0])
    assert res.S == (1,) and res.violation == pytest.approx(1.0)
    with pytest.raises(PreconditionError):
        separate_theorem4(t, [0.0, 1.0])


def test_example6_gd_table_with_d_equal_n1(classified):
    c = classified[6]
    t = build_epsilon_table_GD(c, D=c.N1)
    assert t.eps_hat(1, 0) == pytest.approx(0.3142136, abs=1e-6)
    cut = t.cut((1,))
    assert cut.coef == pytest.approx([-3.1825, 3.1825], abs=1e-3)
    res = separate(t, [0.0, 1.0])
    assert res.S == (1,) and res.objective == pytest.approx(3.1826, abs=1e-3)


def test_example6_default_table_has_no_columns(classified):
    t = build_epsilon_table_GD(classified[6])
    assert t.cols == () and t.M == (0, 1)


def test_example6_ef_membership(classified):
    c = classified[6]
    t = build_epsilon_table_GD(c, D=c.N1)
    ef = build_extended_formulation(t)
    lam = c.lambda1[1]
    assert ef.contains(np.array([0.0, lam]))
    assert ef.contains(np.array([1.0, 1.0]))
    assert not ef.contains(np.array([0.0, 1.01 * lam]))


def test_cut_outside_M_rejected(classified):
    t = build_epsilon_table_GD(classified[1])
    with pytest.raises(PreconditionError):
        t.cut((5,))


def test_gd_needs_outside_apex(fixtures):
    with pytest.raises(PreconditionError):
        build_epsilon_table_GD(fixtures[2].classify((1,)))


def test_empty_set_gives_zero_objective():
    t = EpsilonTable.from_values("G_D", 3, (0, 1), (2,), [[1.0], [2.0]], [1.0, 1.0, 1.0])
    assert t.value((), [1, 1, 1]) == 0.0
    assert t.order(2) == (0, 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(2, 7), st.integers(0, 3), st.sampled_from(["G_D", "S_k"]))
def test_lp_separation_matches_enumeration(seed, m, nb, context):
    rng = np.random.default_rng(seed)
    t = random_table(rng, m, nb, context)
    x = rng.uniform(0, 2, size=t.n)
    res = separate(t, x)
    S, best = brute_force_separation(t, x)
    assert res.objective == pytest.approx(best, abs=1e-7)
    assert res.integrality_gap <= 1e-7
    assert t.value(res.S, x) == pytest.approx(best, abs=1e-7)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 3), st.integers(0, 2))
def test_ef_projection_equals_cut_family(seed, m, nb):
    rng = np.random.default_rng(seed)
    t = random_table(rng, m, nb, "G_D")
    ef = build_extended_formulation(t)
    cuts = [c for c in t.all_cuts() if not c.trivial]
    for x in rng.uniform(0, 2, size=(30, t.n)):
        worst = max(float(c.violation(x)) for c in cuts)
        if abs(worst) < 1e-6:
            continue
        assert ef.contains(x) == (worst < 0)
