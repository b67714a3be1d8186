import pytest

from budget_signaling.controls import TARGETS, all_controls, m2_belief, perturbed_t_h
from budget_signaling.d1 import check_reasonable
from budget_signaling.verifier import FAIL, verify_all, verify_ic


@pytest.fixture(scope="module")
def reports(quad_eq):
    return {name: verify_all(eq) for name, eq in all_controls(quad_eq).items()}


@pytest.mark.parametrize("name", sorted(TARGETS))
def test_control_fails_its_target(reports, name):
    assert reports[name][TARGETS[name]].status == FAIL


@pytest.mark.parametrize("name", sorted(TARGETS))
def test_control_fails_nothing_else(reports, name):
    assert reports[name].failures() == [TARGETS[name]]


def test_belief_control_has_witness(quad_eq):
    res = check_reasonable(m2_belief(quad_eq))
    assert not res.passed
    m1, a, b = res.witness
    assert a + m1 < 2.0 and b + m1 < 2.0


def test_rebayes_shift_is_a_genuine_ic_violation(quad_eq):
    # a higher boundary raises the pooled wage by 0.5e-3 for uniform types,
    # which type 2.37 (gap 2.4e-4 below indifference) strictly prefers
    eq = perturbed_t_h(quad_eq, 1e-3, rebayes=True)
    assert eq.pooled_wage - quad_eq.pooled_wage == pytest.approx(5e-4, abs=1e-12)
    rec = verify_ic(eq)
    assert rec.status == FAIL and rec.witness[0] == pytest.approx(2.37)
