import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from budget_signaling.errors import UnknownFamily
from budget_signaling.families import COST_FAMILIES, NONCOG_FAMILIES, OUTPUT_FAMILIES, family_params, make_family

rng = np.random.default_rng(7)
M_PTS = rng.uniform(0.05, 3.0, 100)
T_PTS = rng.uniform(0.5, 4.0, 100)

COST = [("power", {"a": 2, "b": 2, "p": 1}), ("power", {"a": 1.5, "b": 4, "p": 3}), ("power", {"a": 3, "b": 1, "p": 0.5})]
OUTPUT = [("affine", {"gamma": 0.5}), ("affine", {"gamma": 0, "scale": 2}), ("multiplicative", {"gamma": 0.3})]
NONCOG = [("quadratic", {"k": 0.5}), ("exponential", {"scale": 2})]


def central(fn, x, h):
    return (fn(x + h) - fn(x - h)) / (2 * h)


def rel_err(a, b):
    return np.max(np.abs(a - b) / np.maximum(np.abs(b), 1.0))


@pytest.mark.parametrize("name, params", COST + OUTPUT)
def test_two_argument_derivatives_match_finite_differences(name, params):
    kind = "cost" if name in COST_FAMILIES else "output"
    fam = make_family(kind, name, **params)
    dm = central(lambda m: fam(m, T_PTS), M_PTS, 1e-6 * 3.0)
    dt = central(lambda t: fam(M_PTS, t), T_PTS, 1e-6 * 4.0)
    assert rel_err(fam.d_m1(M_PTS, T_PTS), dm) < 1e-5
    assert rel_err(fam.d_t(M_PTS, T_PTS), dt) < 1e-5


@pytest.mark.parametrize("name, params", NONCOG)
def test_noncog_derivative_matches_finite_differences(name, params):
    fam = make_family("noncog", name, **params)
    assert rel_err(fam.d_m2(M_PTS), central(fam, M_PTS, 1e-6 * 3.0)) < 1e-5


@settings(max_examples=40, deadline=None)
@given(a=st.floats(1.2, 4.0), b=st.floats(0.5, 5.0), p=st.floats(0.2, 4.0),
       m=st.floats(0.1, 3.0), t=st.floats(0.5, 4.0))
def test_power_cost_derivatives_property(a, b, p, m, t):
    fam = make_family("cost", "power", a=a, b=b, p=p)
    assert fam.d_m1(m, t) == pytest.approx(central(lambda x: fam(x, t), m, 1e-6 * 3.0), rel=1e-5, abs=1e-8)
    assert fam.d_t(m, t) == pytest.approx(central(lambda x: fam(m, x), t, 1e-6 * 4.0), rel=1e-5, abs=1e-8)


@settings(max_examples=40, deadline=None)
@given(g=st.floats(0.0, 3.0), m=st.floats(0.0, 3.0), t=st.floats(0.5, 4.0))
def test_output_derivatives_property(g, m, t):
    for name in OUTPUT_FAMILIES:
        fam = make_family("output", name, gamma=g)
        assert fam.d_m1(m, t) == pytest.approx(central(lambda x: fam(x, t), m, 1e-6 * 3.0), rel=1e-5, abs=1e-8)
        assert fam.d_t(m, t) == pytest.approx(central(lambda x: fam(m, x), t, 1e-6 * 4.0), rel=1e-5, abs=1e-8)


def test_registry_lookup_errors():
    with pytest.raises(UnknownFamily):
        make_family("cost", "cubic")
    with pytest.raises(UnknownFamily):
        make_family("cost", "power", q=1)


@pytest.mark.parametrize("kind, table", [("cost", COST_FAMILIES), ("output", OUTPUT_FAMILIES), ("noncog", NONCOG_FAMILIES)])
def test_family_params_round_trip(kind, table):
    for name in table:
        fam = make_family(kind, name)
        assert make_family(kind, name, **family_params(fam)) == fam
