import dataclasses

import numpy as np
import pytest

from budget_signaling.controls import perturbed_t_h, swapped_pair
from budget_signaling.equilibrium import Equilibrium
from budget_signaling.verifier import (
    FAIL,
    NA,
    PASS,
    find_jumps,
    verify_all,
    verify_foc_residuals,
    verify_ic,
    verify_indifference,
    verify_monotone,
    verify_structure,
)


@dataclasses.dataclass(frozen=True, eq=False)
class MidPool(Equilibrium):
    """Types in [2.0, 2.1) share the action of type 2.0."""

    def schedule_at(self, t):
        m1, m2 = super().schedule_at(t)
        if np.ndim(m1) == 0:
            return m1, m2
        a, b = super().schedule_at(2.0)
        band = (np.asarray(t) >= 2.0) & (np.asarray(t) < 2.1)
        return np.where(band, a, m1), np.where(band, b, m2)


@pytest.fixture(scope="module")
def quad_report(quad_eq):
    return verify_all(quad_eq)


def test_full_suite_passes(quad_report):
    assert quad_report.passed, quad_report.failures()


def test_report_is_deterministic(quad_eq, quad_report):
    assert verify_all(quad_eq).to_dict() == quad_report.to_dict()


def test_monotone_examples(quad_eq, wide_eq):
    assert verify_monotone(quad_eq).status == PASS
    assert verify_monotone(wide_eq).status == PASS
    bad = verify_monotone(swapped_pair(quad_eq))
    assert bad.status == FAIL and bad.witness is not None


def test_ic_quad(quad_report):
    assert quad_report["ic"].worst <= 1e-4


def test_ic_catches_large_threshold_shift(quad_eq):
    rec = verify_ic(perturbed_t_h(quad_eq, 0.05))
    assert rec.status == FAIL
    t = rec.witness[0]
    assert quad_eq.t_h < t < quad_eq.t_h + 0.05
    assert rec.witness[1:] == (2.0, 0.0)


def test_lowest_type_has_no_profitable_slack_deviation(quad_eq):
    g = np.linspace(0, 2, 81)
    m1, m2 = np.meshgrid(g, g, indexing="ij")
    ok = m1 + m2 < 2.0 - 1e-9
    gain = quad_eq.sender_utility(1.0, m1[ok], m2[ok]) - quad_eq.utility(1.0)
    assert gain.max() <= 1e-12


def test_structure_two_part_with_pool(quad_report):
    rec = quad_report["structure"]
    assert rec.status == PASS
    assert len(rec.details["jumps"]) == 1


def test_structure_mid_schedule_pool(quad_eq):
    fields = {f.name: getattr(quad_eq, f.name) for f in dataclasses.fields(Equilibrium)}
    rec = verify_structure(MidPool(**fields))
    assert rec.status == FAIL
    assert "b_pool_interval_to_top" in rec.details["failed"]


def test_structure_never_binding(wide_eq):
    rec = verify_structure(wide_eq)
    assert rec.status == PASS
    assert rec.details["jumps"] == []


def test_kink_slopes_reported(quad_report):
    d = quad_report["structure"].details
    assert d["e_kink_left_slope"] == pytest.approx(np.sqrt(2), abs=0.01)
    assert d["e_kink_right_slope"] == pytest.approx(np.sqrt(2), abs=0.01)


def test_indifference(quad_eq, wide_eq):
    assert verify_indifference(quad_eq).worst <= 1e-8
    assert verify_indifference(wide_eq).status == NA
    rec = verify_indifference(perturbed_t_h(quad_eq, 1e-3))
    assert rec.status == FAIL
    assert rec.worst > 1e-8


def test_indifference_residual_matches_slope(quad_eq):
    from budget_signaling.thresholds import indifference_gap
    p, d, s = quad_eq.prims, quad_eq.dist, quad_eq.schedule
    h = 1e-6
    slope = (indifference_gap(p, d, s, quad_eq.t_h + h) - indifference_gap(p, d, s, quad_eq.t_h - h)) / (2 * h)
    rec = verify_indifference(perturbed_t_h(quad_eq, 1e-3))
    assert rec.worst == pytest.approx(abs(slope) * 1e-3, rel=0.01)


def test_foc(quad_eq, wide_eq, gamma_eq):
    for eq in (quad_eq, wide_eq, gamma_eq):
        rec = verify_foc_residuals(eq)
        assert rec.status == PASS, rec.details


def test_foc_excludes_kink_node(quad_eq):
    th = quad_eq.thresholds
    grid = np.array([1.2, th.t_ell, 1.8])
    assert verify_foc_residuals(quad_eq, type_grid=grid).status == PASS


def test_foc_detects_wrong_alpha(quad_eq):
    bad = dataclasses.replace(quad_eq, prims=dataclasses.replace(quad_eq.prims, alpha=1.1))
    rec = verify_foc_residuals(bad)
    assert rec.status == FAIL
    assert rec.details["binding_max"] == pytest.approx(0.1, abs=1e-6)


def test_find_jumps():
    t = np.linspace(0, 1, 101)
    m1 = t.copy()
    m1[60:] += 0.5
    assert find_jumps(t, m1, np.zeros_like(t)) == [59]
    assert find_jumps(t, t, np.zeros_like(t)) == []


@pytest.mark.parametrize("fixture", ["wide_eq", "gamma_eq"])
def test_full_suite_other_families(fixture, request):
    rep = verify_all(request.getfixturevalue(fixture))
    assert rep.passed, rep.failures()


@pytest.mark.parametrize("delta", [0.0, 0.05])
def test_ic_matches_brute_force(quad_eq, delta):
    from budget_signaling.verifier import message_grid
    eq = perturbed_t_h(quad_eq, delta) if delta else quad_eq
    rec = verify_ic(eq, n_types=21, n_messages=21)
    _, m1, m2 = message_grid(2.0, 21)
    brute = max(float(np.max(eq.sender_utility(t, m1, m2)) - eq.utility(t)) for t in eq.dist.grid(21))
    assert rec.details["max_gain"] == pytest.approx(brute, abs=1e-14)
