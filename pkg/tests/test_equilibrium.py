import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from budget_signaling.equilibrium import BINDING, POOL, SLACK, constraint_status
from budget_signaling.equilibrium import solve
from budget_signaling.errors import OutOfDomain
from budget_signaling.model import ModelPrimitives, uniform
from budget_signaling.verifier import verify_all

from conftest import SQRT2


def test_bottom_utility(quad_eq):
    assert quad_eq.utility(1.0) == pytest.approx(1.5, abs=1e-12)
    assert quad_eq.sender_utility(1.0, 0.0, 1.0) == pytest.approx(1.5, abs=1e-12)


def test_closed_form_below_kink(quad_eq):
    t = np.linspace(1.0, SQRT2 - 1e-6, 300)
    m1, m2 = quad_eq.schedule_at(t)
    assert np.max(np.abs(m1 - np.sqrt(t**2 - 1))) <= 1e-6
    assert np.all(m2 == 1.0)


def test_pool_segment(quad_eq):
    t_h = quad_eq.t_h
    t = np.linspace(t_h, 3.0, 50)
    m1, m2 = quad_eq.schedule_at(t)
    assert np.all(m1 == 2.0) and np.all(m2 == 0.0)
    assert quad_eq.pooled_wage == pytest.approx((t_h + 3) / 2, abs=1e-10)
    assert quad_eq.wage_at(2.0, 0.0) == pytest.approx((t_h + 3) / 2, abs=1e-10)


def test_schedule_landmarks(quad_eq):
    th = quad_eq.thresholds
    assert quad_eq.schedule_at(1.0) == (th.m1_low, th.m2_circ)
    m1, m2 = quad_eq.schedule_at(th.t_ell)
    assert m1 == pytest.approx(1.0, abs=1e-9) and m2 == pytest.approx(1.0, abs=1e-9)
    assert quad_eq.schedule_at(quad_eq.t_h) == (2.0, 0.0)


def test_wage_examples(quad_eq):
    t = 1.2
    m1, m2 = quad_eq.schedule_at(t)
    assert quad_eq.wage_at(m1, m2) == pytest.approx(1.0 + t, abs=1e-7)


def test_wage_below_bottom_action(gamma_eq):
    p = gamma_eq.prims
    for m1, m2 in [(0.2, 0.3), (0.1, 1.0), (0.4, 1.5)]:
        assert gamma_eq.wage_at(m1, m2) == pytest.approx(p.alpha * m2 + p.f(m1, 1.0), abs=1e-12)


def test_belief_examples(quad_eq):
    m_pre = quad_eq.m1_pre
    for m1 in np.linspace(m_pre + 1e-6, 2.0 - 1e-6, 7):
        b = quad_eq.belief_at(m1, 2.0 - m1)
        assert b.kind == "point" and b.value == quad_eq.t_h
    top = quad_eq.belief_at(2.0, 0.0)
    assert (top.kind, top.lo, top.hi) == ("interval", quad_eq.t_h, 3.0)
    m1, _ = quad_eq.schedule_at(1.2)
    assert quad_eq.belief_at(m1, 0.3) == quad_eq.belief_at(m1, 1.0)


def test_deviation_utility_closed_form(quad_eq):
    expected = 1 + np.sqrt(1.25) - 0.625
    assert quad_eq.sender_utility(1.0, 0.5, 1.0) == pytest.approx(expected, abs=1e-8)


def test_own_action_gives_equilibrium_utility(quad_eq):
    for t in np.linspace(1.0, 3.0, 41):
        m1, m2 = quad_eq.schedule_at(t)
        assert quad_eq.sender_utility(t, m1, m2) == pytest.approx(quad_eq.utility(t), abs=1e-7)


@pytest.mark.parametrize("msg, expected", [((1, 1, 2), BINDING), ((0.3, 1, 2), SLACK)])
def test_constraint_status(msg, expected):
    assert constraint_status(*msg) == expected


def test_constraint_status_infeasible():
    with pytest.raises(OutOfDomain):
        constraint_status(1, 1.1, 2)


def test_out_of_domain_type(quad_eq):
    with pytest.raises(OutOfDomain):
        quad_eq.schedule_at(3.5)


@settings(max_examples=200, deadline=None)
@given(m1=st.floats(0.0, 2.0), a=st.floats(0.0, 1.0), b=st.floats(0.0, 1.0))
def test_reasonable_beliefs(quad_eq, m1, a, b):
    room = 2.0 - m1 - 1e-8
    if room <= 0:
        return
    assert quad_eq.belief_at(m1, a * room) == quad_eq.belief_at(m1, b * room)


def test_on_path_bayes(quad_eq):
    t = np.linspace(1.0, quad_eq.t_h, 400, endpoint=False)[1:]
    m1, m2 = quad_eq.schedule_at(t)
    lo, hi = quad_eq.belief_bounds(m1, m2)
    assert np.all(lo == hi)
    assert np.max(np.abs(lo - t)) <= 1e-7


def test_productivity_part_of_wage_monotone_on_path(quad_eq):
    t = quad_eq.type_grid
    m1, m2 = quad_eq.schedule_at(t)
    wage = quad_eq.wage_at(m1, m2)
    assert np.all(np.diff(wage - quad_eq.prims.alpha * m2) >= 0)
    slack = t < quad_eq.thresholds.t_ell
    assert np.all(np.diff(wage[slack]) >= 0)
    assert wage[-1] >= wage[0]


def test_wage_falls_just_above_the_kink(quad_eq):
    # binding: w = 2 - m1 + t and dm1/dt = 1/phi_b(1, sqrt 2) = sqrt 2
    t0 = quad_eq.thresholds.t_ell
    h = 1e-5
    w = [quad_eq.wage_at(*quad_eq.schedule_at(t)) for t in (t0, t0 + h)]
    assert (w[1] - w[0]) / h == pytest.approx(1 - SQRT2, abs=1e-3)


def test_indifference_in_utilities(quad_eq):
    t_h = quad_eq.t_h
    left = float(quad_eq.schedule.utility(t_h))
    right = quad_eq.pooled_wage - quad_eq.prims.c(2.0, t_h)
    assert abs(left - right) <= 1e-7


def test_regions(quad_eq):
    regions = quad_eq.region_at(np.array([1.0, 1.3, 1.5, 2.0, 2.5, 3.0]))
    assert list(regions) == [SLACK, SLACK, BINDING, BINDING, POOL, POOL]


def test_never_binding_regime(wide_eq):
    m1, m2 = wide_eq.schedule_at(wide_eq.type_grid)
    assert np.all(m2 == m2[0])
    assert m1[-1] == pytest.approx(np.sqrt(8.0), abs=1e-8)
    assert set(wide_eq.region_at(wide_eq.type_grid)) == {SLACK}


def test_kink_at_pool_has_no_binding_types():
    # alpha = 0.5, M = 0.9, types on [1, 2]: the pool starts below the binding point
    prims = ModelPrimitives.from_names(("power", {}), ("affine", {}), ("quadratic", {}), 0.5, 0.9)
    eq = solve(prims, uniform(1.0, 2.0))
    th = eq.thresholds
    assert th.regime.value == "KinkAtPool"
    assert th.t_ell == th.t_h < th.t_bind
    assert set(eq.region_at(eq.type_grid)) == {"slack", "pool"}
    assert verify_all(eq).passed
