"""Model primitives, the type prior, assumption checks and truncated means."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from scipy import integrate, optimize

from .errors import NonFiniteEvaluation, QuadratureFailure, RootNotBracketed
from .families import make_family

STRICT_MARGIN = 1e-10
QUAD_ABS_TOL = 1e-10
M2_CIRC_WIDTH = 1e-12


@dataclass(frozen=True)
class ModelPrimitives:
    """The quintuple (c, f, h, alpha, M).

    ``cost``, ``output`` and ``noncog`` are registry families carrying their
    own analytic derivatives.
    """

    cost: object
    output: object
    noncog: object
    alpha: float
    budget: float

    @classmethod
    def from_names(cls, cost, output, noncog, alpha, budget):
        """Build from ``(name, params)`` pairs, e.g. ``("power", {"a": 2})``."""
        return cls(
            make_family("cost", cost[0], **cost[1]),
            make_family("output", output[0], **output[1]),
            make_family("noncog", noncog[0], **noncog[1]),
            float(alpha),
            float(budget),
        )

    def with_budget(self, budget):
        return replace(self, budget=float(budget))

    def c(self, m1, t):
        return self.cost(m1, t)

    def f(self, m1, t):
        return self.output(m1, t)

    def h(self, m2):
        return self.noncog(m2)

    def c_m1(self, m1, t):
        return self.cost.d_m1(m1, t)

    def c_t(self, m1, t):
        return self.cost.d_t(m1, t)

    def f_m1(self, m1, t):
        return self.output.d_m1(m1, t)

    def f_t(self, m1, t):
        return self.output.d_t(m1, t)

    def h_prime(self, m2):
        return self.noncog.d_m2(m2)


def quad_family(budget=2.0, alpha=1.0):
    """c = m1^2/(2t), f = t, h = m2^2/2: the closed-form reference instance."""
    return ModelPrimitives.from_names(
        ("power", {"a": 2, "b": 2}), ("affine", {"gamma": 0}), ("quadratic", {}), alpha, budget
    )


@dataclass(frozen=True)
class TypeDistribution:
    family: object
    t_lo: float
    t_hi: float

    def __post_init__(self):
        if not 0 < self.t_lo < self.t_hi:
            raise ValueError(f"need 0 < t_lo < t_hi, got [{self.t_lo}, {self.t_hi}]")

    @classmethod
    def from_name(cls, name, t_lo, t_hi, **params):
        return cls(make_family("distribution", name, **params), float(t_lo), float(t_hi))

    def pdf(self, t):
        return self.family.pdf(t, self.t_lo, self.t_hi)

    def cdf(self, t):
        return self.family.cdf(t, self.t_lo, self.t_hi)

    def grid(self, n):
        return np.linspace(self.t_lo, self.t_hi, n)


def uniform(t_lo=1.0, t_hi=3.0):
    return TypeDistribution.from_name("uniform", t_lo, t_hi)


class Derivatives(NamedTuple):
    c_m1: float
    f_m1: float
    f_t: float
    h_prime: float


def eval_derivatives(prims, m1, m2, t):
    with np.errstate(all="ignore"):  # non-finite values are reported below
        out = Derivatives(
            np.asarray(prims.c_m1(m1, t), dtype=float),
            np.asarray(prims.f_m1(m1, t), dtype=float),
            np.asarray(prims.f_t(m1, t), dtype=float),
            np.asarray(prims.h_prime(m2), dtype=float),
        )
    for name, value in zip(out._fields, out):
        if not np.all(np.isfinite(value)):
            raise NonFiniteEvaluation(f"{name} is not finite", witness=(m1, m2, t))
    if all(v.ndim == 0 for v in out):
        return Derivatives(*(float(v) for v in out))
    return out


def truncated_mean_output(prims, dist, t_cut, m1=None):
    """E[f(m1, z) | z >= t_cut] under the prior; ``m1`` defaults to the budget."""
    m1 = prims.budget if m1 is None else m1
    if not dist.t_lo - 1e-12 <= t_cut <= dist.t_hi + 1e-12:
        raise ValueError(f"t_cut={t_cut} outside [{dist.t_lo}, {dist.t_hi}]")
    t_cut = min(max(t_cut, dist.t_lo), dist.t_hi)
    width = dist.t_hi - t_cut
    if width <= 1e-12 * dist.t_hi:
        return float(prims.f(m1, dist.t_hi))
    mass = _quad(dist.pdf, t_cut, dist.t_hi, QUAD_ABS_TOL)
    if mass <= 0:
        return float(prims.f(m1, 0.5 * (t_cut + dist.t_hi)))
    top = _quad(lambda z: prims.f(m1, z) * dist.pdf(z), t_cut, dist.t_hi, QUAD_ABS_TOL * mass)
    return top / mass


def _quad(fn, a, b, tol):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, err = integrate.quad(lambda z: float(fn(z)), a, b, epsabs=tol, epsrel=1e-13, limit=200)
        except integrate.IntegrationWarning as exc:
            raise QuadratureFailure(str(exc), witness=(a, b)) from None
    if not np.isfinite(value) or err > 10 * max(tol, 1e-13 * abs(value)):
        raise QuadratureFailure(f"error estimate {err:.3g} above tolerance {tol:.3g}", witness=(a, b))
    return value


# --- assumption validation -------------------------------------------------------


@dataclass
class AssumptionCheck:
    name: str
    passed: bool
    worst: float = 0.0  # worst violation magnitude, 0 when passing
    witness: tuple | None = None


@dataclass
class AssumptionReport:
    checks: list = field(default_factory=list)
    m2_circ: float = float("nan")

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self):
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self):
        return {
            "passed": self.passed,
            "m2_circ": self.m2_circ,
            "checks": [
                {"name": c.name, "passed": c.passed, "worst": c.worst,
                 "witness": None if c.witness is None else [float(x) for x in c.witness]}
                for c in self.checks
            ],
        }


def unconstrained_m2_circ(prims):
    """Maximiser of alpha*m2 - h(m2) over m2 >= 0, not restricted to [0, M]."""
    g = lambda m2: prims.alpha - float(prims.h_prime(m2))
    if g(0.0) <= 0.0:
        return 0.0
    hi = max(prims.budget, 1.0)
    for _ in range(60):
        if g(hi) < 0.0:
            return optimize.bisect(g, 0.0, hi, xtol=M2_CIRC_WIDTH, rtol=4 * np.finfo(float).eps)
        hi *= 2.0
    raise RootNotBracketed("alpha - h' never changes sign", witness=(hi,))


def _check(name, margins, points):
    """``margins`` must all be >= STRICT_MARGIN; ``points`` gives witnesses."""
    margins = np.asarray(margins, dtype=float).ravel()
    if margins.size == 0:
        return AssumptionCheck(name, True)
    k = int(np.argmin(margins))
    worst = float(margins[k])
    if worst >= STRICT_MARGIN:
        return AssumptionCheck(name, True)
    return AssumptionCheck(name, False, STRICT_MARGIN - worst, tuple(float(p.ravel()[k]) for p in points))


def validate_assumptions(prims, dist, grid_density=25):
    """Grid check of every structural assumption on the primitives.

    Strictness is tested on consecutive grid points; the t-monotonicity of the
    cost skips the m1 = 0 row, where registry costs are identically zero.
    """
    if grid_density < 2:
        raise ValueError("grid_density must be >= 2")
    n = int(grid_density)
    M = prims.budget
    m = np.linspace(0.0, M, n)
    t = dist.grid(n)
    mm, tt = np.meshgrid(m, t, indexing="ij")
    zero = np.zeros_like(mm)

    with np.errstate(all="ignore"):
        values = {
            "c": prims.c(mm, tt), "f": prims.f(mm, tt), "h": prims.h(m),
            "c_m1": prims.c_m1(mm, tt), "f_m1": prims.f_m1(mm, tt),
            "f_t": prims.f_t(mm, tt), "h_prime": prims.h_prime(m),
        }
    for key, val in values.items():
        bad = ~np.isfinite(np.asarray(val, dtype=float))
        if bad.any():
            idx = np.unravel_index(np.argmax(bad), bad.shape)
            if bad.ndim == 1:
                witness = (float(m[idx[0]]), float(m[idx[0]]), float(t[0]))
            else:
                witness = (float(mm[idx]), 0.0, float(tt[idx]))
            raise NonFiniteEvaluation(f"{key} not finite", witness=witness)

    c, f = values["c"], values["f"]
    checks = []
    checks.append(_check("1b_cost_increasing_m1", np.diff(c, axis=0), (mm[1:], zero[1:], tt[1:])))
    checks.append(_check("1b_cost_decreasing_t", -np.diff(c[1:], axis=1), (mm[1:, 1:], zero[1:, 1:], tt[1:, 1:])))
    nondec = np.diff(f, axis=0) + STRICT_MARGIN + 1e-12  # non-strict
    checks.append(_check("1d_output_nondecreasing_m1", nondec, (mm[1:], zero[1:], tt[1:])))
    checks.append(_check("1d_output_increasing_t", np.diff(f, axis=1), (mm[:, 1:], zero[:, 1:], tt[:, 1:])))
    checks.append(_check("1d_output_t_slope_positive", values["f_t"], (mm, zero, tt)))

    # single crossing on every ordered pair m > m', t > t'
    ih, il = np.triu_indices(n, k=1)  # ih < il
    hi_m, lo_m = il, ih
    hi_t, lo_t = il, ih
    cross = (
        c[np.ix_(hi_m, lo_t)] + c[np.ix_(lo_m, hi_t)]
        - c[np.ix_(hi_m, hi_t)] - c[np.ix_(lo_m, lo_t)]
    )
    pts_m = np.broadcast_to(m[hi_m][:, None], cross.shape)
    pts_t = np.broadcast_to(t[hi_t][None, :], cross.shape)
    checks.append(_check("2_single_crossing", cross, (pts_m, np.zeros_like(pts_m), pts_t)))

    surplus = f - c
    checks.append(_check("3a_output_minus_cost_concave", -np.diff(surplus, n=2, axis=0), (mm[1:-1], zero[1:-1], tt[1:-1])))
    hvals = np.asarray(values["h"], dtype=float)
    checks.append(_check("3b_noncog_cost_convex", np.diff(hvals, n=2), (np.zeros(n - 2), m[1:-1], np.full(n - 2, t[0]))))

    m2c = unconstrained_m2_circ(prims)
    ok4 = 0.0 < m2c < M
    checks.append(AssumptionCheck("4_interior_m2_circ", ok4,
                                  0.0 if ok4 else float(max(m2c - M, -m2c, 0.0)),
                                  None if ok4 else (0.0, m2c, float(t[0]))))
    return AssumptionReport(checks, m2c)
