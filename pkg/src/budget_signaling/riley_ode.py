"""Slack and binding right-hand sides of the belief ODE and their integration.

The ODE is integrated as dt/dm1 = phi(m1, t): the same curve as mu'(m1), but
the stop events (constraint about to bind, budget exhausted) are expressed in
m1, so m1 is the natural independent variable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DegenerateDenominator, NonFiniteEvaluation, StalledIntegration, StepUnderflow

SLACK = "slack"
BINDING = "binding"

RTOL = 1e-9
ATOL = 1e-11
MIN_NODES = 400  # caps the step so that Hermite derivatives stay accurate
START_SLACK = 1e-9  # rounding allowance when the start sits on a stationary point
SNAP_SPAN = 1e-10  # relative gap below which the start already sits on the stop


def _phi(prims, region, m1, t):
    num = prims.f_m1(m1, t) - prims.c_m1(m1, t)
    if region == BINDING:
        num = num - prims.alpha + prims.h_prime(prims.budget - np.asarray(m1, dtype=float))
    elif region != SLACK:
        raise ValueError(f"unknown region {region!r}")
    return -num / prims.f_t(m1, t)


def _scalar_phi(prims, region, m1, t):
    ft = float(prims.f_t(m1, t))
    if not ft > 0:
        raise DegenerateDenominator("f_t must be strictly positive", witness=(m1, t))
    num = float(prims.f_m1(m1, t)) - float(prims.c_m1(m1, t))
    if region == BINDING:
        num = num - prims.alpha + float(prims.h_prime(prims.budget - m1))
    elif region != SLACK:
        raise ValueError(f"unknown region {region!r}")
    val = -num / ft
    if not math.isfinite(val):
        raise NonFiniteEvaluation("belief ODE right-hand side not finite", witness=(m1, t))
    return val


def _checked_phi(prims, region, m1, t):
    if np.ndim(m1) == 0 and np.ndim(t) == 0:
        return _scalar_phi(prims, region, float(m1), float(t))
    ft = prims.f_t(m1, t)
    if np.any(np.asarray(ft) <= 0):
        raise DegenerateDenominator("f_t must be strictly positive", witness=(m1, t))
    with np.errstate(all="ignore"):
        val = _phi(prims, region, m1, t)
    if not np.all(np.isfinite(val)):
        raise NonFiniteEvaluation("belief ODE right-hand side not finite", witness=(m1, t))
    return float(val) if np.ndim(val) == 0 else val


def slack_rhs(prims, m1, t):
    """-(f_m1 - c_m1) / f_t."""
    return _checked_phi(prims, SLACK, m1, t)


def binding_rhs(prims, m1, t):
    """-(f_m1 - c_m1 - alpha + h'(M - m1)) / f_t."""
    return _checked_phi(prims, BINDING, m1, t)


def rhs(prims, region, m1, t):
    return _checked_phi(prims, region, m1, t)


# --- sampled path ------------------------------------------------------------------


def _hermite(s, h, y0, y1, d0, d1):
    s2 = s * s
    s3 = s2 * s
    return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * d1


def _hermite_slope(s, h, y0, y1, d0, d1):
    s2 = s * s
    return (6 * s2 - 6 * s) * y0 / h + (3 * s2 - 4 * s + 1) * d0 + (6 * s - 6 * s2) * y1 / h + (3 * s2 - 2 * s) * d1


@dataclass(frozen=True)
class SampledPath:
    """Monotone solution of the belief ODE: simultaneously t(m1) and m1(t).

    Between nodes the curve is the cubic Hermite interpolant through the ODE
    slopes; slopes are Fritsch-Carlson limited so the interpolant is monotone.
    """

    m1: np.ndarray
    t: np.ndarray
    slope: np.ndarray  # dt/dm1 at each node
    region: tuple
    stop_event: str = ""
    error_estimate: float = 0.0
    _h: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        m1 = np.asarray(self.m1, dtype=float)
        t = np.asarray(self.t, dtype=float)
        slope = np.asarray(self.slope, dtype=float).copy()
        if m1.shape != t.shape or m1.ndim != 1 or m1.size == 0:
            raise ValueError("path needs matching non-empty 1-D node arrays")
        if m1.size > 1 and (np.any(np.diff(m1) <= 0) or np.any(np.diff(t) <= 0)):
            k = int(np.argmin(np.minimum(np.diff(m1), np.diff(t))))
            raise StalledIntegration("path is not strictly increasing", witness=(m1[k + 1], t[k + 1]))
        if m1.size > 1:
            secant = np.diff(t) / np.diff(m1)
            a = slope[:-1] / secant
            b = slope[1:] / secant
            r = np.hypot(a, b)
            scale = np.where(r > 3.0, 3.0 / r, 1.0)
            slope[:-1] = np.minimum(slope[:-1], slope[:-1] * scale)
            slope[1:] = np.minimum(slope[1:], slope[1:] * scale)
        object.__setattr__(self, "m1", m1)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "slope", slope)
        object.__setattr__(self, "region", tuple(self.region))
        object.__setattr__(self, "_h", np.diff(m1))

    def __len__(self):
        return self.m1.size

    @property
    def start(self):
        return float(self.m1[0]), float(self.t[0])

    @property
    def end(self):
        return float(self.m1[-1]), float(self.t[-1])

    def _locate(self, nodes, x):
        i = np.searchsorted(nodes, x, side="right") - 1
        return np.clip(i, 0, max(nodes.size - 2, 0))

    def t_of_m(self, m):
        """Belief mu(m1): the type whose separating signal is m1 (clipped to the path)."""
        m = np.clip(np.asarray(m, dtype=float), self.m1[0], self.m1[-1])
        if self.m1.size == 1:
            return np.full_like(m, self.t[0]) if m.ndim else float(self.t[0])
        i = self._locate(self.m1, m)
        h = self._h[i]
        s = (m - self.m1[i]) / h
        out = _hermite(s, h, self.t[i], self.t[i + 1], self.slope[i], self.slope[i + 1])
        return float(out) if out.ndim == 0 else out

    def dt_dm(self, m):
        m = np.clip(np.asarray(m, dtype=float), self.m1[0], self.m1[-1])
        if self.m1.size == 1:
            return np.full_like(m, self.slope[0]) if m.ndim else float(self.slope[0])
        i = self._locate(self.m1, m)
        h = self._h[i]
        s = (m - self.m1[i]) / h
        out = _hermite_slope(s, h, self.t[i], self.t[i + 1], self.slope[i], self.slope[i + 1])
        return float(out) if out.ndim == 0 else out

    def m1_of_t(self, t):
        """Separating signal m1*(t), by bisection on the monotone Hermite cubic."""
        t = np.clip(np.asarray(t, dtype=float), self.t[0], self.t[-1])
        if self.m1.size == 1:
            return np.full_like(t, self.m1[0]) if t.ndim else float(self.m1[0])
        i = self._locate(self.t, t)
        h = self._h[i]
        y0, y1, d0, d1 = self.t[i], self.t[i + 1], self.slope[i], self.slope[i + 1]
        lo = np.zeros_like(t)
        hi = np.ones_like(t)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            above = _hermite(mid, h, y0, y1, d0, d1) > t
            hi = np.where(above, mid, hi)
            lo = np.where(above, lo, mid)
        out = np.clip(self.m1[i] + 0.5 * (lo + hi) * h, self.m1[i], self.m1[i + 1])
        out = np.where(t <= self.t[0], self.m1[0], np.where(t >= self.t[-1], self.m1[-1], out))
        return float(out) if out.ndim == 0 else out

    def join(self, other):
        """Append ``other``, which must start where this path ends."""
        if abs(other.m1[0] - self.m1[-1]) > 1e-12 or abs(other.t[0] - self.t[-1]) > 1e-12:
            raise ValueError("paths do not meet")
        return SampledPath(
            np.concatenate([self.m1, other.m1[1:]]),
            np.concatenate([self.t, other.t[1:]]),
            np.concatenate([self.slope[:-1], other.slope]),
            self.region[:-1] + other.region,
            other.stop_event,
            max(self.error_estimate, other.error_estimate),
        )


@dataclass(frozen=True)
class StopEvents:
    """t_hi triggers E1; ``m1_stop`` is E2 (slack) or E3 (binding)."""

    t_hi: float
    m1_stop: float


def _single_node(prims, region, m0, t0, event):
    return SampledPath(np.array([m0]), np.array([t0]), np.array([rhs(prims, region, m0, t0)]), (region,), event)


def _run(prims, region, m0, t0, stop, rtol, atol):
    def fun(m, y):
        v = rhs(prims, region, m, y[0])
        return [0.0 if -START_SLACK < v < 0.0 else v]

    def hit_top(m, y):
        return y[0] - stop.t_hi

    hit_top.terminal = True
    hit_top.direction = 1.0
    span = stop.m1_stop - m0
    sol = solve_ivp(fun, (m0, stop.m1_stop), [t0], method="RK45", rtol=rtol, atol=atol,
                    events=hit_top, max_step=span / MIN_NODES, dense_output=True)
    if sol.status == -1:
        raise StepUnderflow(sol.message, witness=(float(sol.t[-1]), float(sol.y[0, -1])))
    return sol


def integrate_schedule(prims, start, region, stop, rtol=RTOL, atol=ATOL, estimate_error=True):
    """Integrate dt/dm1 = phi from ``start`` until the first stop event.

    Returns a SampledPath whose ``stop_event`` is ``"E1"`` (type reached
    ``t_hi``), ``"E2"`` (slack path reached ``M - m2_circ``) or ``"E3"``
    (binding path reached ``M``).
    """
    m0, t0 = float(start[0]), float(start[1])
    m_event = "E2" if region == SLACK else "E3"
    if t0 >= stop.t_hi:
        return _single_node(prims, region, m0, stop.t_hi, "E1")
    if m0 >= stop.m1_stop - SNAP_SPAN * max(1.0, abs(stop.m1_stop)):
        # a span at rounding level cannot be stepped across
        return _single_node(prims, region, max(m0, stop.m1_stop), t0, m_event)
    if rhs(prims, region, m0, t0) <= -START_SLACK:
        raise StalledIntegration("right-hand side negative at the start", witness=(m0, t0))

    sol = _run(prims, region, m0, t0, stop, rtol, atol)
    m = sol.t.copy()
    t = sol.y[0].copy()
    if sol.status == 1:
        event = "E1"
        t[-1] = stop.t_hi
    else:
        event = m_event
        m[-1] = stop.m1_stop
    # an event landing on an accepted step leaves a near-duplicate node
    keep = np.concatenate([np.diff(m) > 1e-14 * max(1.0, abs(m[-1])), [True]])
    keep[0] = True
    m, t = m[keep], t[keep]
    if m.size > 1 and m[-1] - m[-2] <= 0:
        m, t = np.delete(m, -2), np.delete(t, -2)

    slope = np.maximum(np.asarray(rhs(prims, region, m, t), dtype=float), 0.0)
    bad = np.flatnonzero(slope[1:] <= 0)
    if bad.size:
        k = bad[0] + 1
        raise StalledIntegration("right-hand side became non-positive", witness=(float(m[k]), float(t[k])))

    # measured against a 1000x tighter run, floored at the nominal tolerance
    err = rtol * float(np.max(np.abs(t))) + atol
    if estimate_error and m.size > 2:
        ref = _run(prims, region, m0, t0, StopEvents(stop.t_hi, float(m[-1])), rtol * 1e-3, atol * 1e-3)
        err = max(err, float(np.max(np.abs(ref.sol(m[:-1])[0] - t[:-1]))))
    return SampledPath(m, t, slope, (region,) * m.size, event, err)


def estimate_lipschitz(prims, region, box, samples=50):
    """Sampled sup |d phi / d t| over ``box = ((m_lo, m_hi), (t_lo, t_hi))``.

    A diagnostic for the Picard-Lindelof precondition, not a proof.
    """
    (m_lo, m_hi), (t_lo, t_hi) = box
    if t_hi <= t_lo:
        return 0.0
    m = np.linspace(m_lo, m_hi, samples)
    t = np.linspace(t_lo, t_hi, samples)
    mm, tt = np.meshgrid(m, t, indexing="ij")
    step = 1e-6 * max(abs(t_hi), 1.0)
    up = np.minimum(tt + step, t_hi)
    down = np.maximum(tt - step, t_lo)
    with np.errstate(all="ignore"):
        slope = (_phi(prims, region, mm, up) - _phi(prims, region, mm, down)) / (up - down)
    if not np.all(np.isfinite(slope)):
        k = np.unravel_index(np.argmax(~np.isfinite(slope)), slope.shape)
        raise NonFiniteEvaluation("rhs not finite inside box", witness=(float(mm[k]), float(tt[k])))
    return float(np.max(np.abs(slope)))
