"""Criterion D1 on a type grid, and the reasonable-belief property.

For quasilinear utility the D1 survivors of a message are the types needing
the smallest wage to weakly gain from it: argmin_t U(t) + c(m1', t) + h(m2').
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .equilibrium import BINDING_TOL, FEASIBLE_TOL

TIE_TOL = 1e-9
OFF_PATH_GRID = 50


@dataclass(frozen=True)
class D1Result:
    message: tuple
    types: np.ndarray
    wages: np.ndarray  # minimal inducing wage per type
    survivors: np.ndarray  # boolean mask over ``types``

    @property
    def min_wage(self):
        return float(self.wages.min())

    @property
    def hull(self):
        t = self.types[self.survivors]
        return float(t.min()), float(t.max())


def min_inducing_wage(eq, t, m1, m2):
    """U(t) + c(m1, t) + h(m2): the least wage at which type t weakly gains."""
    eq._check_messages(m1, m2)
    p = eq.prims
    return eq.utility(t) + p.c(m1, t) + p.h(m2)


def d1_support(eq, m1, m2, type_grid=None, tie=TIE_TOL):
    types = eq.type_grid if type_grid is None else np.asarray(type_grid, dtype=float)
    wages = np.asarray(min_inducing_wage(eq, types, m1, m2), dtype=float)
    survivors = wages <= wages.min() + tie
    return D1Result((float(m1), float(m2)), types, wages, survivors)


def d1_hulls(eq, m1, m2, type_grid=None, tie=TIE_TOL):
    """Survivor hulls for many messages at once; returns (lo, hi) arrays."""
    types = eq.type_grid if type_grid is None else np.asarray(type_grid, dtype=float)
    m1 = np.asarray(m1, dtype=float).ravel()
    m2 = np.asarray(m2, dtype=float).ravel()
    eq._check_messages(m1, m2)
    p = eq.prims
    u = eq.utility(types)
    # h(m2) is common to all types, so it cannot move the argmin
    w = u[None, :] + p.c(m1[:, None], types[None, :])
    keep = w <= w.min(axis=1, keepdims=True) + tie
    first = np.argmax(keep, axis=1)
    last = types.size - 1 - np.argmax(keep[:, ::-1], axis=1)
    return types[first], types[last]


def on_path_mask(eq, m1, m2, tol=BINDING_TOL):
    """True where (m1, m2) is some type's equilibrium action."""
    m1 = np.asarray(m1, dtype=float)
    m2 = np.asarray(m2, dtype=float)
    th = eq.thresholds
    M = eq.prims.budget
    t_lo, t_hi = eq.dist.t_lo, eq.dist.t_hi
    top = eq.t_h if eq.has_pool else t_hi
    on = np.zeros(np.broadcast(m1, m2).shape, dtype=bool)
    if th.t_ell > t_lo:
        lo, _ = eq.schedule.at(t_lo)
        hi, _ = eq.schedule.at(min(th.t_ell, top))
        on |= (np.abs(m2 - th.m2_circ) <= tol) & (m1 >= lo - tol) & (m1 <= hi + tol)
    if top > th.t_ell:
        lo, _ = eq.schedule.at(th.t_ell)
        hi, _ = eq.schedule.at(top)
        on |= (np.abs(m1 + m2 - M) <= tol) & (m1 >= lo - tol) & (m1 <= hi + tol)
    if eq.has_pool:
        on |= (np.abs(m1 - M) <= tol) & (np.abs(m2) <= tol)
    return on


def off_path_grid(eq, n=OFF_PATH_GRID):
    M = eq.prims.budget
    g = np.linspace(0.0, M, n)
    m1, m2 = (a.ravel() for a in np.meshgrid(g, g, indexing="ij"))
    feasible = m1 + m2 <= M + FEASIBLE_TOL
    m1, m2 = m1[feasible], np.minimum(m2[feasible], M - m1[feasible])
    off = ~on_path_mask(eq, m1, m2)
    return m1[off], m2[off]


@dataclass
class D1Check:
    passed: bool
    worst: float  # largest excursion of the belief outside the survivor hull
    witness: tuple | None
    count: int


def check_d1_consistency(eq, n=OFF_PATH_GRID, type_grid=None):
    """Belief support inside the D1 survivor hull, up to one type-grid step."""
    types = eq.type_grid if type_grid is None else np.asarray(type_grid, dtype=float)
    step = float(np.max(np.diff(types)))
    m1, m2 = off_path_grid(eq, n)
    if m1.size == 0:
        return D1Check(True, 0.0, None, 0)
    d_lo, d_hi = d1_hulls(eq, m1, m2, types)
    b_lo, b_hi = eq.belief_bounds(m1, m2)
    excess = np.maximum(d_lo - b_lo, b_hi - d_hi)
    k = int(np.argmax(excess))
    worst = max(float(excess[k]), 0.0)
    witness = None if worst <= step else (float(m1[k]), float(m2[k]), float(b_lo[k]), float(d_lo[k]), float(d_hi[k]))
    return D1Check(worst <= step, worst, witness, int(m1.size))


def check_reasonable(eq, sample_count=2000, seed=0):
    """Random slack pairs (m1, m2), (m1, m2') must get identical belief supports.

    Binding pairs sharing m1 are the same message, so only slack pairs are drawn.
    """
    rng = np.random.default_rng(seed)
    M = eq.prims.budget
    m1 = rng.uniform(0.0, M, sample_count)
    room = M - m1 - 2 * BINDING_TOL
    ok = room > 0
    m1, room = m1[ok], room[ok]
    if m1.size == 0:
        return D1Check(True, 0.0, None, 0)
    m2a = rng.uniform(0.0, 1.0, m1.size) * room
    m2b = rng.uniform(0.0, 1.0, m1.size) * room
    lo_a, hi_a = eq.belief_bounds(m1, m2a)
    lo_b, hi_b = eq.belief_bounds(m1, m2b)
    gap = np.maximum(np.abs(lo_a - lo_b), np.abs(hi_a - hi_b))
    k = int(np.argmax(gap))
    worst = float(gap[k])
    witness = None if worst == 0.0 else (float(m1[k]), float(m2a[k]), float(m2b[k]))
    return D1Check(worst == 0.0, worst, witness, int(m1.size))
