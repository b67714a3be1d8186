"""The assembled monotone D1 equilibrium: schedules, utilities, wages and beliefs.

Beliefs below the pool depend on m1 alone.  The separating curve mu*(m1) is
clipped at both ends, which gives the point t_lo below the bottom action and
the point t_hi above the top action when there is no pool.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolation, OutOfDomain
from .model import truncated_mean_output
from .riley_ode import ATOL, RTOL
from .thresholds import solve_thresholds

BINDING_TOL = 1e-9
FEASIBLE_TOL = 1e-12
TYPE_GRID = 2001

SLACK, BINDING, POOL = "slack", "binding", "pool"


def constraint_status(m1, m2, M):
    total = float(m1) + float(m2)
    if total > M + FEASIBLE_TOL or m1 < -FEASIBLE_TOL or m2 < -FEASIBLE_TOL:
        raise OutOfDomain(f"message ({m1}, {m2}) outside the feasible set for M={M}", witness=(m1, m2))
    return BINDING if abs(total - M) <= BINDING_TOL else SLACK


@dataclass(frozen=True)
class BeliefSupport:
    kind: str  # "point" or "interval"
    lo: float
    hi: float

    @classmethod
    def point(cls, t):
        return cls("point", float(t), float(t))

    @classmethod
    def interval(cls, lo, hi):
        return cls("interval", float(lo), float(hi))

    @property
    def value(self):
        if self.kind != "point":
            raise ValueError("interval support has no point value")
        return self.lo

    def contains(self, t, tol=0.0):
        return self.lo - tol <= t <= self.hi + tol


@dataclass(frozen=True, eq=False)
class Equilibrium:
    prims: object
    dist: object
    thresholds: object
    schedule: object  # SeparatingSchedule
    belief_path: object  # SampledPath for mu*(m1)
    pooled_wage: float | None
    m1_pre: float | None  # m1*(t_h-), left end of the discontinuity
    type_grid: np.ndarray

    # --- convenience ----------------------------------------------------------

    @property
    def regime(self):
        return self.thresholds.regime

    @property
    def has_pool(self):
        return self.thresholds.t_h is not None

    @property
    def t_h(self):
        return self.thresholds.t_h

    @property
    def slack_path(self):
        return self.schedule.slack_path

    @property
    def binding_path(self):
        return self.schedule.binding_path

    @property
    def pooled_pair(self):
        return (self.prims.budget, 0.0) if self.has_pool else None

    @property
    def U(self):
        return self.utility(self.type_grid)

    def _check_types(self, t):
        t = np.asarray(t, dtype=float)
        lo, hi = self.dist.t_lo, self.dist.t_hi
        if np.any(t < lo - FEASIBLE_TOL) or np.any(t > hi + FEASIBLE_TOL) or not np.all(np.isfinite(t)):
            bad = t[(t < lo - FEASIBLE_TOL) | (t > hi + FEASIBLE_TOL) | ~np.isfinite(t)]
            raise OutOfDomain(f"type outside [{lo}, {hi}]", witness=(float(np.ravel(bad)[0]),))
        return np.clip(t, lo, hi)

    def _check_messages(self, m1, m2):
        m1 = np.asarray(m1, dtype=float)
        m2 = np.asarray(m2, dtype=float)
        bad = (m1 + m2 > self.prims.budget + FEASIBLE_TOL) | (m1 < -FEASIBLE_TOL) | (m2 < -FEASIBLE_TOL)
        if np.any(bad):
            k = np.argmax(np.ravel(bad))
            w = (float(np.ravel(np.broadcast_to(m1, bad.shape))[k]), float(np.ravel(np.broadcast_to(m2, bad.shape))[k]))
            raise OutOfDomain(f"infeasible message for M={self.prims.budget}", witness=w)
        return m1, m2

    # --- schedule and utility -------------------------------------------------

    def schedule_at(self, t):
        """(m1*(t), m2*(t)); the value at t_h itself is the pooled pair."""
        t = self._check_types(t)
        m1, m2 = self.schedule.at(np.atleast_1d(t))
        if self.has_pool:
            pooled = np.atleast_1d(t) >= self.t_h
            m1 = np.where(pooled, self.prims.budget, m1)
            m2 = np.where(pooled, 0.0, m2)
        if t.ndim == 0:
            return float(m1[0]), float(m2[0])
        return m1, m2

    def pre_pool_limit(self):
        """(m1*(t_h-), m2*(t_h-)), the separating action just below the pool."""
        if not self.has_pool:
            return None
        return self.schedule.at(self.t_h)

    def binding_mask(self, t):
        """Types at or above t_ell, except when the constraint never binds."""
        t = np.asarray(t, dtype=float)
        if self.schedule.binding_path is None and self.schedule.slack_path is not None:
            return np.zeros(t.shape, dtype=bool)
        return t >= self.thresholds.t_ell

    def region_at(self, t):
        t = np.atleast_1d(self._check_types(t))
        out = np.where(self.binding_mask(t), BINDING, SLACK).astype(object)
        if self.has_pool:
            out[t >= self.t_h] = POOL
        return out

    def utility(self, t):
        """Equilibrium utility U(t); pooled types get pooled_wage - c(M, t)."""
        t = self._check_types(t)
        tt = np.atleast_1d(t)
        u = np.asarray(self.schedule.utility(tt), dtype=float)
        if self.has_pool:
            pooled = tt >= self.t_h
            u = np.where(pooled, self.pooled_wage - self.prims.c(self.prims.budget, tt), u)
        return float(u[0]) if t.ndim == 0 else u

    # --- beliefs and wages ----------------------------------------------------

    def belief_bounds(self, m1, m2=None):
        """Vectorised support bounds (lo, hi) of the belief at messages (m1, m2).

        ``m2`` only matters through feasibility; beliefs are functions of m1.
        """
        m1 = np.asarray(m1, dtype=float)
        if m2 is not None:
            m1, _ = self._check_messages(m1, m2)
        lo = np.asarray(self.belief_path.t_of_m(m1), dtype=float)
        hi = lo.copy()
        if self.has_pool:
            M = self.prims.budget
            gap = (m1 >= self.m1_pre) & (m1 < M - FEASIBLE_TOL)
            top = m1 >= M - FEASIBLE_TOL
            lo = np.where(gap | top, self.t_h, lo)
            hi = np.where(gap, self.t_h, np.where(top, self.dist.t_hi, hi))
        return lo, hi

    def belief_at(self, m1, m2):
        constraint_status(m1, m2, self.prims.budget)
        lo, hi = self.belief_bounds(float(m1), float(m2))
        lo, hi = float(lo), float(hi)
        return BeliefSupport.point(lo) if hi == lo else BeliefSupport.interval(lo, hi)

    def wage_at(self, m1, m2):
        """alpha m2 + expected output under the belief (vectorised)."""
        m1, m2 = self._check_messages(m1, m2)
        lo, hi = self.belief_bounds(m1, m2)
        w = self.prims.alpha * m2 + self.prims.f(m1, lo)
        if self.has_pool:
            pooled = hi > lo
            w = np.where(pooled, self.prims.alpha * m2 + self.pooled_wage, w)
        return float(w) if np.ndim(w) == 0 else w

    def sender_utility(self, t, m1, m2):
        p = self.prims
        return self.wage_at(m1, m2) - p.h(m2) - p.c(m1, t)


# module-level aliases mirroring the method names


def schedule_at(eq, t):
    return eq.schedule_at(t)


def wage_at(eq, m1, m2):
    return eq.wage_at(m1, m2)


def belief_at(eq, m1, m2):
    return eq.belief_at(m1, m2)


def sender_utility(eq, t, m1, m2):
    return eq.sender_utility(t, m1, m2)


def _violation(msg, mask, t):
    k = int(np.argmax(mask))
    raise InvariantViolation(msg, witness=(float(t[k]),))


def check_invariants(eq, tol=BINDING_TOL):
    """Cheap construction-time checks on the type grid."""
    t = eq.type_grid
    m1, m2 = eq.schedule_at(t)
    M = eq.prims.budget
    th = eq.thresholds
    if np.any(np.diff(m1) < 0):
        _violation("m1* decreasing", np.diff(m1) < 0, t[1:])
    if np.any(np.diff(m2) > 0):
        _violation("m2* increasing", np.diff(m2) > 0, t[1:])
    if np.any(np.diff(m1 + m2) < 0):
        _violation("m1* + m2* decreasing", np.diff(m1 + m2) < 0, t[1:])
    above = eq.binding_mask(t)
    below = ~above
    if np.any(below & (np.abs(m2 - th.m2_circ) > tol)):
        _violation("m2* differs from m2_circ below t_ell", below & (np.abs(m2 - th.m2_circ) > tol), t)
    if np.any(above & (np.abs(m1 + m2 - M) > tol)):
        _violation("constraint slack above t_ell", above & (np.abs(m1 + m2 - M) > tol), t)
    if eq.has_pool:
        pooled = t >= th.t_h
        off = pooled & ((m1 != M) | (m2 != 0.0))
        if np.any(off):
            _violation("pooled type not at (M, 0)", off, t)


def assemble(prims, dist, thresholds, schedule, type_grid_size=TYPE_GRID, check=True):
    paths = [p for p in (schedule.slack_path, schedule.binding_path) if p is not None]
    if schedule.slack_path is not None and schedule.binding_path is not None:
        belief_path = schedule.slack_path.join(schedule.binding_path)
    else:
        belief_path = paths[0]
    pooled_wage = m1_pre = None
    if thresholds.t_h is not None:
        pooled_wage = truncated_mean_output(prims, dist, thresholds.t_h)
        m1_pre = float(schedule.at(thresholds.t_h)[0])
    eq = Equilibrium(prims, dist, thresholds, schedule, belief_path, pooled_wage, m1_pre,
                     dist.grid(type_grid_size))
    if check:
        check_invariants(eq)
    return eq


def solve(prims, dist, rtol=RTOL, atol=ATOL, type_grid_size=TYPE_GRID):
    thresholds, schedule = solve_thresholds(prims, dist, rtol, atol)
    return assemble(prims, dist, thresholds, schedule, type_grid_size)
