"""Threshold types, the pooling indifference condition and regime classification."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import MultipleSignChanges, NoPoolRoot, RootNotBracketed
from .model import M2_CIRC_WIDTH, truncated_mean_output, unconstrained_m2_circ
from .riley_ode import ATOL, BINDING, RTOL, SLACK, StopEvents, integrate_schedule

REGIME_TOL = 1e-9
TH_WIDTH = 1e-10
SCAN_POINTS = 200
EPS4 = 4 * np.finfo(float).eps


class Regime(str, enum.Enum):
    SEPARATING_NO_BINDING = "SeparatingNoBinding"
    TWO_PART_SEPARATING = "TwoPartSeparating"
    ALL_BINDING_SEPARATING = "AllBindingSeparating"
    TWO_PART_WITH_POOL = "TwoPartWithPool"
    KINK_AT_POOL = "KinkAtPool"
    ALL_BINDING_WITH_POOL = "AllBindingWithPool"

    @property
    def has_pool(self):
        return self in (Regime.TWO_PART_WITH_POOL, Regime.KINK_AT_POOL, Regime.ALL_BINDING_WITH_POOL)


@dataclass(frozen=True)
class Thresholds:
    """``t_bind`` is where the separating schedule meets the constraint; it
    differs from ``t_ell`` only when the pool starts inside the slack region."""

    m2_circ: float
    m1_low: float
    t_ell: float
    t_h: float | None
    t_prime: float | None
    regime: Regime
    t_bind: float

    def to_dict(self):
        return {
            "m2_circ": self.m2_circ, "m1_low": self.m1_low, "t_ell": self.t_ell,
            "t_h": self.t_h, "t_prime": self.t_prime, "t_bind": self.t_bind,
            "regime": self.regime.value,
        }


def snap_to_budget(x, M):
    """Round onto the lattice spaced ulp(M), where M - x is exact for 0 <= x <= M."""
    u = np.spacing(float(M))
    return np.round(np.asarray(x, dtype=float) / u) * u


def compute_m2_circ(prims):
    g = lambda m2: prims.alpha - float(prims.h_prime(m2))
    lo, hi = g(0.0), g(prims.budget)
    if not (lo > 0.0 > hi):
        raise RootNotBracketed("alpha - h' does not change sign on [0, M]", witness=(lo, hi))
    return optimize.bisect(g, 0.0, prims.budget, xtol=M2_CIRC_WIDTH, rtol=EPS4)


def _argmax_concave(slope, lo, hi):
    """Maximiser on [lo, hi] of a concave function given its derivative."""
    if slope(lo) <= 0.0:
        return lo
    if slope(hi) >= 0.0:
        return hi
    return optimize.bisect(slope, lo, hi, xtol=1e-14, rtol=EPS4)


def compute_m1_low(prims, t):
    """Full-information m1 of type ``t`` on [0, M], ignoring the constraint's interaction with m2."""
    slope = lambda m: float(prims.f_m1(m, t) - prims.c_m1(m, t))
    return _argmax_concave(slope, 0.0, prims.budget)


def constrained_m1_low(prims, t):
    """argmax over m1 in [0, M] of f - c + alpha (M - m1) - h(M - m1).

    Bounded golden/Brent search, then the first-order condition is polished
    by bisection when the optimum is interior.
    """
    M = prims.budget
    obj = lambda m: -float(prims.f(m, t) - prims.c(m, t) + prims.alpha * (M - m) - prims.h(M - m))
    res = optimize.minimize_scalar(obj, bounds=(0.0, M), method="bounded", options={"xatol": 1e-10})
    slope = lambda m: float(prims.f_m1(m, t) - prims.c_m1(m, t) - prims.alpha + prims.h_prime(M - m))
    best = _argmax_concave(slope, 0.0, M)
    return best if obj(best) <= obj(res.x) + 1e-14 else float(res.x)


def find_t_ell(prims, dist, slack_path, m1_low=None, m2_circ=None):
    if slack_path is None:
        return dist.t_lo
    if m1_low is not None and m2_circ is not None and m1_low + m2_circ >= prims.budget:
        return dist.t_lo
    if slack_path.stop_event == "E2":
        return slack_path.end[1]
    return dist.t_hi


def check_condition_A(binding_path, M, t_hi):
    if binding_path is None or binding_path.stop_event != "E3":
        return None
    m_end, t_end = binding_path.end
    if abs(m_end - M) <= 1e-12 and binding_path.start[1] <= t_end < t_hi:
        return t_end
    return None


@dataclass(frozen=True)
class SeparatingSchedule:
    """The ODE-generated (pre-pool) schedule: slack below ``t_bind``, binding above."""

    prims: object
    m2_circ: float
    t_bind: float
    slack_path: object  # SampledPath or None
    binding_path: object  # SampledPath or None

    @property
    def t_end(self):
        path = self.binding_path if self.binding_path is not None else self.slack_path
        return path.end[1]

    def at(self, t):
        t = np.asarray(t, dtype=float)
        M = self.prims.budget
        m1 = np.empty_like(t)
        m2 = np.empty_like(t)
        slack = t < self.t_bind if self.binding_path is not None else np.ones_like(t, dtype=bool)
        if self.slack_path is None:
            slack = np.zeros_like(t, dtype=bool)
        if slack.any():
            m1[slack] = self.slack_path.m1_of_t(t[slack])
            m2[slack] = self.m2_circ
        bind = ~slack
        if bind.any():
            m1[bind] = snap_to_budget(self.binding_path.m1_of_t(t[bind]), M)
            m2[bind] = M - m1[bind]
        if t.ndim == 0:
            return float(m1), float(m2)
        return m1, m2

    def utility(self, t):
        m1, m2 = self.at(t)
        p = self.prims
        return p.alpha * m2 + p.f(m1, t) - p.c(m1, t) - p.h(m2)


def indifference_gap(prims, dist, schedule, t):
    """Pool payoff minus separating payoff for type ``t`` (zero at t_h)."""
    pool = truncated_mean_output(prims, dist, float(t)) - float(prims.c(prims.budget, t))
    return pool - float(schedule.utility(float(t)))


def pool_existence_margin(prims, dist, schedule):
    """Positive when the lowest type strictly prefers its own action to (M, 0)."""
    return -indifference_gap(prims, dist, schedule, dist.t_lo)


def find_t_h(prims, dist, schedule, t_prime):
    margin = pool_existence_margin(prims, dist, schedule)
    if margin <= 0.0:
        raise NoPoolRoot(f"lowest type weakly prefers the pool (margin {margin:.3g})", witness=(dist.t_lo,))
    grid = np.linspace(dist.t_lo + REGIME_TOL, t_prime, SCAN_POINTS)
    gap = lambda t: indifference_gap(prims, dist, schedule, t)
    values = gap_profile(prims, dist, schedule, grid)
    sign = np.sign(values)
    changes = np.flatnonzero(sign[:-1] * sign[1:] < 0)
    zeros = np.flatnonzero(sign == 0)
    if zeros.size:
        return float(grid[zeros[0]])
    if changes.size == 0:
        raise NoPoolRoot("no sign change of the indifference gap on (t_lo, t']",
                         witness=(float(grid[np.argmax(values)]), float(values.max())))
    if changes.size > 1:
        raise MultipleSignChanges(f"{changes.size} sign changes of the indifference gap",
                                  witness=tuple(float(grid[k]) for k in changes))
    k = changes[0]
    return optimize.bisect(gap, grid[k], grid[k + 1], xtol=TH_WIDTH, rtol=EPS4)


def gap_profile(prims, dist, schedule, grid):
    """indifference_gap on a whole grid (one schedule inversion)."""
    grid = np.asarray(grid, dtype=float)
    pool = np.array([truncated_mean_output(prims, dist, t) for t in grid]) - prims.c(prims.budget, grid)
    return pool - schedule.utility(grid)


def sign_changes(prims, dist, schedule, t_prime, points=SCAN_POINTS):
    grid = np.linspace(dist.t_lo + REGIME_TOL, t_prime, points)
    values = gap_profile(prims, dist, schedule, grid)
    return int(np.sum(np.sign(values[:-1]) * np.sign(values[1:]) < 0))


def classify_regime(t_ell, t_h, t_lo, t_hi, tol=REGIME_TOL):
    bottom = abs(t_ell - t_lo) <= tol
    if t_h is None:
        if abs(t_ell - t_hi) <= tol:
            return Regime.SEPARATING_NO_BINDING
        return Regime.ALL_BINDING_SEPARATING if bottom else Regime.TWO_PART_SEPARATING
    if bottom:
        return Regime.ALL_BINDING_WITH_POOL
    if abs(t_ell - t_h) <= tol:
        return Regime.KINK_AT_POOL
    return Regime.TWO_PART_WITH_POOL


def solve_thresholds(prims, dist, rtol=RTOL, atol=ATOL, estimate_error=True):
    """Run the whole threshold pipeline; returns (Thresholds, SeparatingSchedule).

    When m2_circ is not below M the bottom type is constrained and the
    unbounded root is used, so the regime logic stays defined.
    """
    M = prims.budget
    try:
        m2c = compute_m2_circ(prims)
    except RootNotBracketed:
        m2c = unconstrained_m2_circ(prims)
    if m2c < M:
        m2c = float(snap_to_budget(m2c, M))  # keeps m1 + m2 == M exact at the kink
    m1_unc = compute_m1_low(prims, dist.t_lo)
    slack_path = binding_path = None
    if m1_unc + m2c >= M:
        m1_low = constrained_m1_low(prims, dist.t_lo)
        t_bind = dist.t_lo
        start = (m1_low, dist.t_lo)
    else:
        m1_low = m1_unc
        slack_path = integrate_schedule(prims, (m1_low, dist.t_lo), SLACK, StopEvents(dist.t_hi, M - m2c),
                                        rtol, atol, estimate_error)
        t_bind = find_t_ell(prims, dist, slack_path)
        start = slack_path.end if slack_path.stop_event == "E2" else None
    if start is not None:
        binding_path = integrate_schedule(prims, start, BINDING, StopEvents(dist.t_hi, M), rtol, atol, estimate_error)

    schedule = SeparatingSchedule(prims, m2c, t_bind, slack_path, binding_path)
    t_prime = check_condition_A(binding_path, M, dist.t_hi)
    t_h = None
    if t_prime is not None:
        t_h = find_t_h(prims, dist, schedule, t_prime)
    t_ell = t_bind if t_h is None else min(t_bind, t_h)
    regime = classify_regime(t_ell, t_h, dist.t_lo, dist.t_hi)
    return Thresholds(m2c, m1_low, t_ell, t_h, t_prime, regime, t_bind), schedule
