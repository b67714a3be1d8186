"""Monotone D1 equilibrium of a two-signal signaling market with a resource constraint."""
from .equilibrium import Equilibrium, assemble, solve
from .errors import SchemaError, SignalingError, UnknownFamily
from .model import ModelPrimitives, TypeDistribution, quad_family, uniform, validate_assumptions
from .oracle import compare, discrete_riley, epsilon_equilibrium_check
from .thresholds import Regime, Thresholds, solve_thresholds
from .verifier import verify_all

__all__ = [
    "Equilibrium", "ModelPrimitives", "Regime", "SchemaError", "SignalingError", "Thresholds",
    "TypeDistribution", "UnknownFamily", "assemble", "compare", "discrete_riley",
    "epsilon_equilibrium_check", "quad_family", "solve", "solve_thresholds", "uniform",
    "validate_assumptions", "verify_all",
]
