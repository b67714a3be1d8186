import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from budget_signaling.d1 import check_d1_consistency, check_reasonable, d1_hulls, d1_support, min_inducing_wage
from budget_signaling.equilibrium import solve
from budget_signaling.model import quad_family


def test_min_inducing_wage_direct(quad_eq):
    assert min_inducing_wage(quad_eq, 1.0, 0.5, 1.0) == pytest.approx(2.125, abs=1e-12)


def test_min_inducing_wage_at_own_action(quad_eq):
    for t in (1.0, 1.3, 1.9, 2.2):
        m1, m2 = quad_eq.schedule_at(t)
        assert min_inducing_wage(quad_eq, t, m1, m2) == pytest.approx(quad_eq.wage_at(m1, m2), abs=1e-7)


def test_min_inducing_wage_type_gap(quad_eq):
    c = quad_eq.prims.c
    gap = min_inducing_wage(quad_eq, 1.0, 1.8, 0.2) - min_inducing_wage(quad_eq, 2.0, 1.8, 0.2)
    expected = c(1.8, 1.0) - c(1.8, 2.0) + quad_eq.utility(1.0) - quad_eq.utility(2.0)
    assert gap == pytest.approx(expected, abs=1e-12)


def test_below_bottom_signal_selects_lowest_type(gamma_eq):
    m1_low = gamma_eq.thresholds.m1_low
    assert m1_low == pytest.approx(0.5)
    for m1 in np.linspace(0.01, m1_low - 0.01, 5):
        assert d1_support(gamma_eq, m1, 0.7).hull == (1.0, 1.0)


def test_discontinuity_rectangle_selects_t_h(quad_eq):
    step = float(np.diff(quad_eq.type_grid).max())
    m_pre, m2_pre = quad_eq.pre_pool_limit()
    for m1 in np.linspace(m_pre, 2.0, 6, endpoint=False):
        for m2 in np.linspace(0.0, m2_pre, 5)[1:]:
            m2 = min(m2, 2.0 - m1)
            lo, hi = d1_support(quad_eq, m1, m2).hull
            assert abs(lo - quad_eq.t_h) <= step and abs(hi - quad_eq.t_h) <= step


def test_above_top_selects_highest_type(wide_eq):
    top, _ = wide_eq.schedule_at(3.0)
    for m1 in np.linspace(top + 0.1, 9.0, 5):
        assert d1_support(wide_eq, m1, 0.5).hull == (3.0, 3.0)


@settings(max_examples=60, deadline=None)
@given(a=st.floats(0.0, 2.0), b=st.floats(0.0, 2.0), m2=st.floats(0.0, 1.0))
def test_single_crossing_argmin_ordering(quad_eq, a, b, m2):
    lo_m, hi_m = sorted((a, b))
    m2 = min(m2, 2.0 - hi_m)
    l1, h1 = d1_hulls(quad_eq, [lo_m], [m2])
    l2, h2 = d1_hulls(quad_eq, [hi_m], [m2])
    assert l2[0] >= l1[0] and h2[0] >= h1[0]


@pytest.mark.parametrize("fixture", ["quad_eq", "wide_eq", "gamma_eq"])
def test_beliefs_inside_d1_hull(fixture, request):
    eq = request.getfixturevalue(fixture)
    res = check_d1_consistency(eq)
    assert res.passed, res.witness
    assert res.count > 0


@pytest.mark.parametrize("fixture", ["quad_eq", "wide_eq", "gamma_eq"])
def test_reasonable_check_passes(fixture, request):
    assert check_reasonable(request.getfixturevalue(fixture)).passed


def test_reasonable_with_tiny_slack_region(dist):
    eq = solve(quad_family(1.001), dist)
    res = check_reasonable(eq)
    assert res.passed
