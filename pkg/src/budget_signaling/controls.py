"""Negative controls: deliberately broken equilibria for exercising the verifier.

Each control breaks one property and should trip exactly one check.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .equilibrium import BINDING_TOL, Equilibrium, assemble

TARGETS = {"swapped_pair": "monotone", "perturbed_t_h": "indifference", "m2_belief": "reasonable"}


@dataclass(frozen=True, eq=False)
class SwappedPair(Equilibrium):
    """Schedule with the actions of type_grid[i] and type_grid[i + 1] exchanged."""

    swap_index: int = 0

    def schedule_at(self, t):
        m1, m2 = super().schedule_at(t)
        if np.ndim(m1) == 0:
            return m1, m2
        m1, m2 = np.array(m1), np.array(m2)
        a, b = self.type_grid[self.swap_index], self.type_grid[self.swap_index + 1]
        ia, ib = np.flatnonzero(t == a), np.flatnonzero(t == b)
        if ia.size and ib.size:
            i, j = ia[0], ib[0]
            m1[[i, j]] = m1[[j, i]]
            m2[[i, j]] = m2[[j, i]]
        return m1, m2


@dataclass(frozen=True, eq=False)
class M2Belief(Equilibrium):
    """Beliefs shifted down by ``shift`` at slack messages with small m2."""

    shift: float = 1e-5

    def belief_bounds(self, m1, m2=None):
        lo, hi = super().belief_bounds(m1, m2)
        if m2 is None:
            return lo, hi
        m1 = np.asarray(m1, dtype=float)
        m2 = np.asarray(m2, dtype=float)
        slack = m1 + m2 < self.prims.budget - BINDING_TOL
        hit = slack & (m2 < 0.5 * self.thresholds.m2_circ)
        t0 = self.dist.t_lo
        return np.where(hit, np.maximum(lo - self.shift, t0), lo), np.where(hit, np.maximum(hi - self.shift, t0), hi)


def _fields(eq):
    return {f.name: getattr(eq, f.name) for f in dataclasses.fields(Equilibrium)}


def swapped_pair(eq, index=None):
    """Swap two adjacent fine-grid types that are not on the coarse IC grid."""
    if index is None:
        index = eq.type_grid.size // 4 + 5
    return SwappedPair(**_fields(eq), swap_index=int(index))


def perturbed_t_h(eq, delta=1e-3, rebayes=False):
    """Move the pool boundary by ``delta``.

    By default only the threshold moves and the pooled wage keeps its
    equilibrium value.  With ``rebayes`` the pooled wage is recomputed for the
    new boundary, which also changes the payoff of every pooled type.
    """
    if not eq.has_pool:
        raise ValueError("perturbing t_h needs a pool")
    th = dataclasses.replace(eq.thresholds, t_h=eq.t_h + delta)
    if rebayes:
        return assemble(eq.prims, eq.dist, th, eq.schedule, eq.type_grid.size, check=False)
    m1_pre = float(eq.schedule.at(th.t_h)[0])
    return dataclasses.replace(eq, thresholds=th, m1_pre=m1_pre)


def m2_belief(eq, shift=1e-5):
    return M2Belief(**_fields(eq), shift=float(shift))


def all_controls(eq):
    return {"swapped_pair": swapped_pair(eq), "perturbed_t_h": perturbed_t_h(eq), "m2_belief": m2_belief(eq)}
