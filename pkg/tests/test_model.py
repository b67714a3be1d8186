import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from budget_signaling.errors import NonFiniteEvaluation
from budget_signaling.model import (
    ModelPrimitives,
    TypeDistribution,
    eval_derivatives,
    quad_family,
    truncated_mean_output,
    unconstrained_m2_circ,
    uniform,
    validate_assumptions,
)

from conftest import gamma_family


class SquareOutput:
    """f = t^2, a test-only family."""

    def __call__(self, m1, t):
        return np.asarray(t, dtype=float) ** 2 + 0.0 * np.asarray(m1, dtype=float)

    def d_m1(self, m1, t):
        return 0.0 * np.asarray(t, dtype=float)

    def d_t(self, m1, t):
        return 2.0 * np.asarray(t, dtype=float)


def test_quad_family_passes_all_assumptions(quad, dist):
    rep = validate_assumptions(quad, dist)
    assert rep.passed, rep.failures()
    assert rep.m2_circ == pytest.approx(1.0, abs=1e-12)


def test_alpha_three_breaks_interior_m2_circ(dist):
    rep = validate_assumptions(quad_family(2.0, alpha=3.0), dist)
    assert not rep.passed
    assert any(name.startswith("4") for name in rep.failures())


def test_cost_rising_in_type_breaks_monotonicity(dist):
    prims = ModelPrimitives.from_names(("power", {"a": 1, "b": 1, "p": -1}), ("affine", {}), ("quadratic", {}), 1.0, 2.0)
    rep = validate_assumptions(prims, dist)
    check = rep["1b_cost_decreasing_t"]
    assert not check.passed
    m1, _, t = check.witness
    assert 0 < m1 <= 2 and 1 < t <= 3


def test_validate_is_deterministic(quad, dist):
    assert validate_assumptions(quad, dist).to_dict() == validate_assumptions(quad, dist).to_dict()


@pytest.mark.parametrize("t_cut, expected", [(2.0, 2.5), (1.0, 2.0)])
def test_truncated_mean_uniform(quad, dist, t_cut, expected):
    assert truncated_mean_output(quad, dist, t_cut) == pytest.approx(expected, abs=1e-10)


def test_truncated_mean_square_output(quad, dist):
    prims = ModelPrimitives(quad.cost, SquareOutput(), quad.noncog, 1.0, 2.0)
    expected = (3**3 - 1.5**3) / (3 * 1.5)
    assert truncated_mean_output(prims, dist, 1.5) == pytest.approx(expected, abs=1e-10)
    assert expected == pytest.approx(5.25)


def test_truncated_mean_monotone_in_cut(quad):
    dists = [uniform(1, 3), TypeDistribution.from_name("truncated_normal", 1, 3, mean=1.5, sd=0.7),
             TypeDistribution.from_name("truncated_exponential", 1, 3, rate=2)]
    for d in dists:
        vals = [truncated_mean_output(quad, d, c) for c in np.linspace(1, 3, 50)]
        assert np.all(np.diff(vals) >= -1e-12)


@pytest.mark.parametrize("point, expected", [((1, 0.5, 2), (0.5, 0, 1, 0.5)), ((0, 0, 1), (0, 0, 1, 0))])
def test_eval_derivatives_quad(quad, point, expected):
    assert tuple(eval_derivatives(quad, *point)) == pytest.approx(expected, abs=1e-15)


def test_eval_derivatives_affine_slope():
    assert eval_derivatives(gamma_family(0.5), 1, 1, 1).f_m1 == pytest.approx(0.5)


def test_eval_derivatives_nonfinite(quad):
    with pytest.raises(NonFiniteEvaluation):
        eval_derivatives(quad, 1.0, 0.5, 0.0)


def test_unconstrained_m2_circ_ignores_budget():
    assert unconstrained_m2_circ(quad_family(0.5)) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(lo=st.floats(0.5, 2.0), width=st.floats(0.1, 3.0))
def test_distribution_cdf_endpoints(lo, width):
    for name, params in [("uniform", {}), ("truncated_normal", {"mean": 2, "sd": 1}),
                         ("truncated_exponential", {"rate": -1.5})]:
        d = TypeDistribution.from_name(name, lo, lo + width, **params)
        assert d.cdf(lo) == pytest.approx(0.0, abs=1e-12)
        assert d.cdf(lo + width) == pytest.approx(1.0, abs=1e-12)
        assert np.all(d.pdf(d.grid(11)) > 0)


def test_distribution_rejects_bad_support():
    with pytest.raises(ValueError):
        uniform(2.0, 1.0)
