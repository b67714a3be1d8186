"""Discrete-type, discrete-signal surrogate built without any ODE.

Types sit on a uniform grid.  Each type takes the least m1 that stops the
next-lower type from mimicking it (the adjacent no-mimic ladder).  The ladder
is solved in continuous m1 and then projected up onto the signal grid, so
rounding does not accumulate along the ladder.  Global incentive
compatibility is not imposed; ``epsilon_equilibrium_check`` measures it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import InfeasibleSeparation
from .model import unconstrained_m2_circ
from .thresholds import compute_m1_low, constrained_m1_low


@dataclass(frozen=True)
class DiscreteAllocation:
    types: np.ndarray
    m1: np.ndarray
    m2: np.ndarray
    wage: np.ndarray
    weights: np.ndarray  # prior mass of each type's cell
    signals: np.ndarray  # signal grid on [0, M]
    pool_start: int | None  # index of the first pooled type
    budget: float
    shadow_utility: np.ndarray | None = None  # payoffs on the unprojected ladder

    @property
    def t_h(self):
        return None if self.pool_start is None else float(self.types[self.pool_start])

    @property
    def signal_step(self):
        return float(self.signals[1] - self.signals[0])

    @property
    def type_step(self):
        return float(self.types[1] - self.types[0]) if self.types.size > 1 else 0.0

    def utility(self, prims):
        return self.wage - prims.h(self.m2) - prims.c(self.m1, self.types)


def cell_weights(dist, types):
    """Prior mass of the cells around each grid type (midpoint cells)."""
    if types.size == 1:
        return np.ones(1)
    edges = np.concatenate([[dist.t_lo], 0.5 * (types[1:] + types[:-1]), [dist.t_hi]])
    w = np.diff(dist.cdf(edges))
    return w / w.sum()


def _round_up(x, grid):
    i = np.searchsorted(grid, x - 1e-12 * max(1.0, grid[-1]), side="left")
    return grid[min(i, grid.size - 1)]


def _grid_optimum(prims, t, signals, m2_grid):
    """Full-information best grid message of type t."""
    M = prims.budget
    m1 = signals
    m2 = np.minimum(m2_grid, M - m1)
    payoff = prims.alpha * m2 + prims.f(m1, t) - prims.c(m1, t) - prims.h(m2)
    k = int(np.argmax(payoff))
    return float(m1[k]), float(m2[k])


def discrete_riley(prims, dist, n_types, n_signals):
    if n_types < 1 or n_signals < 2:
        raise ValueError("need n_types >= 1 and n_signals >= 2")
    M = prims.budget
    types = dist.grid(n_types) if n_types > 1 else np.array([dist.t_lo])
    signals = np.linspace(0.0, M, n_signals)
    weights = cell_weights(dist, types)
    m2c = unconstrained_m2_circ(prims)
    m2_vals = signals[np.argmax(prims.alpha * signals - prims.h(signals))]  # grid m2 optimum
    m2_of = lambda x: min(m2c, M - x)
    a, f, c, h = prims.alpha, prims.f, prims.c, prims.h

    # continuous shadow ladder
    x = np.empty(n_types)
    if compute_m1_low(prims, types[0]) + m2c >= M:
        x[0] = constrained_m1_low(prims, types[0])
    else:
        x[0] = compute_m1_low(prims, types[0])
    u = np.empty(n_types)
    u[0] = a * m2_of(x[0]) + f(x[0], types[0]) - c(x[0], types[0]) - h(m2_of(x[0]))

    # pooled wage if types k.. pool at (M, 0)
    tail_mass = np.cumsum(weights[::-1])[::-1]
    tail_out = np.cumsum((weights * f(M, types))[::-1])[::-1]
    pool_wage = tail_out / tail_mass

    pool_start = None
    for k in range(1, n_types):
        lo_t, t = types[k - 1], types[k]
        need = lambda z: a * m2_of(z) + f(z, t) - c(z, lo_t) - h(m2_of(z)) - u[k - 1]
        pool_u = pool_wage[k] - c(M, t)
        if need(M) > 0:  # no separating message deters mimicry
            mimic = a * m2_of(x[k - 1]) + f(x[k - 1], lo_t) - c(x[k - 1], t) - h(m2_of(x[k - 1]))
            if pool_u < mimic:
                raise InfeasibleSeparation("neither separation nor the pool deters mimicry", witness=(float(t),))
            pool_start = k
            break
        x[k] = x[k - 1] if need(x[k - 1]) <= 0 else optimize.brentq(need, x[k - 1], M, xtol=1e-14, rtol=1e-14)
        u[k] = a * m2_of(x[k]) + f(x[k], t) - c(x[k], t) - h(m2_of(x[k]))
        if pool_u >= u[k]:
            pool_start = k
            break

    top = n_types if pool_start is None else pool_start
    m1 = np.empty(n_types)
    m2 = np.empty(n_types)
    m1[0], m2[0] = _grid_optimum(prims, types[0], signals, m2_vals)
    for k in range(1, top):
        m1[k] = max(_round_up(x[k], signals), m1[k - 1])
        m2[k] = min(m2_vals, M - m1[k])
    wage = a * m2 + f(m1, types)
    # types sharing a grid message are paid the prior-weighted mean output
    starts = np.flatnonzero(np.concatenate([[True], (np.diff(m1[:top]) != 0) | (np.diff(m2[:top]) != 0)]))
    for lo, hi in zip(starts, np.append(starts[1:], top)):
        if hi - lo > 1:
            out = f(m1[lo], types[lo:hi])
            wage[lo:hi] = a * m2[lo] + np.dot(weights[lo:hi], out) / weights[lo:hi].sum()
    if pool_start is not None:
        m1[pool_start:] = M
        m2[pool_start:] = 0.0
        wage[pool_start:] = pool_wage[pool_start]
        u[pool_start:] = pool_wage[pool_start] - c(M, types[pool_start:])
    return DiscreteAllocation(types, m1, m2, wage, weights, signals, pool_start, M, u)


def _on_path_wages(alloc):
    """Wage paid at each distinct assigned message."""
    return {(float(m1), float(m2)): w for m1, m2, w in zip(alloc.m1, alloc.m2, alloc.wage)}


def epsilon_equilibrium_check(alloc, prims, dist=None, d1_from="shadow"):
    """max over types of (best grid or on-path deviation payoff) - (own payoff).

    Unassigned messages get the discrete D1 belief: the type minimising
    U(t) + c(m1, t), which depends on m1 only.  By default U is taken from
    the unprojected ladder; the projected payoffs carry rounding noise of one
    signal step, which the nearly flat D1 objective turns into belief errors
    of order sqrt(step).
    """
    types = alloc.types
    u = alloc.utility(prims)
    u_d1 = alloc.shadow_utility if d1_from == "shadow" and alloc.shadow_utility is not None else u
    M = alloc.budget
    on = _on_path_wages(alloc)

    g = alloc.signals
    gm1, gm2 = np.meshgrid(g, g, indexing="ij")
    feasible = gm1 + gm2 <= M * (1 + 1e-12)
    m1 = np.concatenate([gm1[feasible], alloc.m1])
    m2 = np.concatenate([np.minimum(gm2[feasible], M - gm1[feasible]), alloc.m2])

    cols, inverse = np.unique(m1, return_inverse=True)
    cost = prims.c(cols[:, None], types[None, :])  # (m1 values, types)
    d1_type = types[np.argmin(u_d1[None, :] + cost, axis=1)]
    wage = prims.alpha * m2 + prims.f(m1, d1_type[inverse])
    for i, (a, b) in enumerate(zip(m1, m2)):
        w = on.get((float(a), float(b)))
        if w is not None:
            wage[i] = w
    net = wage - prims.h(m2)
    best = np.full(cols.size, -np.inf)
    np.maximum.at(best, inverse, net)
    dev = np.max(best[:, None] - cost, axis=0) - u
    return float(max(dev.max(), 0.0))


def epsilon_bound(alloc, prims):
    """One signal step times a sampled Lipschitz constant of the payoff in m1."""
    M = alloc.budget
    m = np.linspace(0.0, M, 64)
    t = alloc.types
    mm, tt = np.meshgrid(m, t, indexing="ij")
    lip = (np.max(np.abs(prims.f_m1(mm, tt))) + np.max(np.abs(prims.c_m1(mm, tt)))
           + abs(prims.alpha) + np.max(np.abs(prims.h_prime(m))))
    return float(lip * alloc.signal_step)


@dataclass(frozen=True)
class Comparison:
    m1_dev: float
    m2_dev: float
    pool_gap: float | None
    signal_step: float
    type_step: float

    @property
    def m1_steps(self):
        return self.m1_dev / self.signal_step

    @property
    def m2_steps(self):
        return self.m2_dev / self.signal_step

    @property
    def pool_steps(self):
        return None if self.pool_gap is None else self.pool_gap / self.type_step


def compare(eq, alloc):
    """Max schedule deviations over discrete types.

    Types between the two pool boundaries are left out: they pool in one
    solution and separate in the other, and the boundary gap is reported
    separately.
    """
    t = alloc.types
    m1, m2 = eq.schedule_at(t)
    keep = np.ones(t.size, dtype=bool)
    gap = None
    if eq.has_pool and alloc.t_h is not None:
        gap = abs(alloc.t_h - eq.t_h)
        lo, hi = sorted((alloc.t_h, eq.t_h))
        keep &= ~((t >= lo) & (t < hi))
    elif eq.has_pool != (alloc.t_h is not None):
        gap = float("inf")
    d1 = float(np.max(np.abs(alloc.m1[keep] - m1[keep]))) if keep.any() else 0.0
    d2 = float(np.max(np.abs(alloc.m2[keep] - m2[keep]))) if keep.any() else 0.0
    return Comparison(d1, d2, gap, alloc.signal_step, alloc.type_step)
