"""Certification of an assembled equilibrium against its structural properties."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import d1 as d1mod
from .equilibrium import constraint_status
from .riley_ode import BINDING, SLACK
from .thresholds import gap_profile, indifference_gap

IC_TOL = 1e-4
FOC_TOL = 1e-6
FOC_BOTTOM_TOL = 1e-10
INDIFF_TOL = 1e-8
JUMP_FACTOR = 10.0
JUMP_WINDOW = 5
IC_TYPES = 201
IC_MESSAGES = 201
SHAPE_POINTS = 50

PASS, FAIL, NA = "pass", "fail", "n/a"


@dataclass
class CheckRecord:
    name: str
    status: str
    worst: float = 0.0
    witness: tuple | None = None
    tolerance: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.status != FAIL


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)

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
        out = []
        for c in self.checks:
            rec = asdict(c)
            rec["witness"] = None if c.witness is None else [float(x) for x in c.witness]
            out.append(rec)
        return {"passed": self.passed, "checks": out}


def _record(name, worst, tol, witness, details=None, strict=False):
    ok = worst < tol if strict else worst <= tol
    return CheckRecord(name, PASS if ok else FAIL, float(worst), None if ok else witness, tol, details or {})


def _grid(eq, type_grid):
    return eq.type_grid if type_grid is None else np.asarray(type_grid, dtype=float)


# --- monotonicity ---------------------------------------------------------------


def verify_monotone(eq, type_grid=None):
    """m1* non-decreasing, m2* non-increasing, m1*+m2* non-decreasing; exact."""
    t = _grid(eq, type_grid)
    m1, m2 = eq.schedule_at(t)
    bad = np.concatenate([-np.diff(m1), np.diff(m2), -np.diff(m1 + m2)])
    k = int(np.argmax(bad))
    worst = max(float(bad[k]), 0.0)
    i = k % (t.size - 1)
    return _record("monotone", worst, 0.0, (float(t[i]), float(t[i + 1])))


# --- incentive compatibility -----------------------------------------------------


def message_grid(M, n=IC_MESSAGES):
    """Feasible points of an n x n grid on [0, M]^2, as flat arrays."""
    g = np.linspace(0.0, M, n)
    m1, m2 = np.meshgrid(g, g, indexing="ij")
    feasible = m1 + m2 <= M * (1 + 1e-12)
    return g, m1[feasible], np.minimum(m2[feasible], M - m1[feasible])


def verify_ic(eq, n_types=IC_TYPES, n_messages=IC_MESSAGES, tol=IC_TOL):
    """max over grid types and grid messages of deviation utility minus U(t)."""
    p = eq.prims
    M = p.budget
    types = eq.dist.grid(n_types)
    g, m1, m2 = message_grid(M, n_messages)
    net = eq.wage_at(m1, m2) - p.h(m2)  # type-independent part
    # best m2 for each m1 row
    row = np.searchsorted(g, m1 + 1e-15 * M, side="right") - 1
    best = np.full(g.size, -np.inf)
    np.maximum.at(best, row, net)
    arg = np.zeros(g.size, dtype=int)
    for i in range(g.size):
        sel = np.flatnonzero(row == i)
        arg[i] = sel[np.argmax(net[sel])]
    dev = best[:, None] - p.c(g[:, None], types[None, :])
    k = np.argmax(dev, axis=0)
    gain = dev[k, np.arange(types.size)] - eq.utility(types)
    j = int(np.argmax(gain))
    msg = arg[k[j]]
    return _record("ic", max(float(gain[j]), 0.0), tol, (float(types[j]), float(m1[msg]), float(m2[msg])),
                   {"max_gain": float(gain[j])})


# --- structure --------------------------------------------------------------------


def _runs(mask):
    """Start/stop index pairs of True runs."""
    edges = np.diff(np.concatenate([[0], mask.astype(int), [0]]))
    return list(zip(np.flatnonzero(edges == 1), np.flatnonzero(edges == -1)))


def find_jumps(t, m1, m2, factor=JUMP_FACTOR, window=JUMP_WINDOW):
    """Indices i where the step i -> i+1 exceeds ``factor`` times the local median step."""
    d = np.abs(np.diff(m1)) + np.abs(np.diff(m2))
    jumps = []
    for i in range(d.size):
        lo, hi = max(0, i - window), min(d.size, i + window + 1)
        neighbours = np.concatenate([d[lo:i], d[i + 1:hi]])
        ref = float(np.median(neighbours)) if neighbours.size else 0.0
        if d[i] > factor * ref and d[i] > 1e-12:
            jumps.append(i)
    return jumps


def verify_structure(eq, type_grid=None):
    t = _grid(eq, type_grid)
    step = float(np.max(np.diff(t)))
    m1, m2 = eq.schedule_at(t)
    M = eq.prims.budget
    th = eq.thresholds
    subs = {}

    # (a) and (b): runs of identical consecutive messages are the pools
    same = (np.diff(m1) == 0) & (np.diff(m2) == 0)
    runs = _runs(same)
    pooled_msgs = [(float(m1[a]), float(m2[a])) for a, _ in runs]
    subs["a_pool_at_M_0"] = all(x == M and y == 0.0 for x, y in pooled_msgs)
    if eq.has_pool:
        subs["b_pool_interval_to_top"] = len(runs) == 1 and runs[0][1] == t.size - 1
    else:
        subs["b_pool_interval_to_top"] = len(runs) == 0

    # (c) the only discontinuity sits at t_h
    jumps = find_jumps(t, m1, m2)
    if eq.has_pool:
        subs["c_single_jump_at_t_h"] = len(jumps) == 1 and abs(t[jumps[0] + 1] - eq.t_h) <= step
    else:
        subs["c_single_jump_at_t_h"] = len(jumps) == 0

    # (d) slack exactly below t_ell
    status = np.array([constraint_status(a, b, M) for a, b in zip(m1, m2)])
    expect = np.where(eq.binding_mask(t), "binding", "slack")
    wrong = status != expect
    subs["d_constraint_status"] = not wrong.any()

    details = {k: bool(v) for k, v in subs.items()}
    details["jumps"] = [float(t[i + 1]) for i in jumps]

    # (e) one-sided slopes at the kink, informational
    top = eq.t_h if eq.has_pool else eq.dist.t_hi
    if eq.dist.t_lo + step < th.t_ell < top - step:
        a, _ = eq.schedule_at(th.t_ell - step)
        b, _ = eq.schedule_at(th.t_ell)
        c, _ = eq.schedule_at(th.t_ell + step)
        details["e_kink_left_slope"] = (b - a) / step
        details["e_kink_right_slope"] = (c - b) / step

    failed = [k for k, v in subs.items() if not v]
    witness = None
    if "d_constraint_status" in failed:
        witness = (float(t[np.argmax(wrong)]),)
    elif "c_single_jump_at_t_h" in failed and jumps:
        witness = tuple(float(t[i + 1]) for i in jumps)
    elif failed and runs:
        witness = tuple(float(t[a]) for a, _ in runs)
    rec = CheckRecord("structure", FAIL if failed else PASS, float(len(failed)), witness, 0.0, details)
    details["failed"] = failed
    return rec


# --- indifference ---------------------------------------------------------------


def verify_indifference(eq, tol=INDIFF_TOL, points=SHAPE_POINTS):
    if not eq.has_pool:
        return CheckRecord("indifference", NA, 0.0, None, tol, {"reason": "no pool"})
    p, dist, th = eq.prims, eq.dist, eq.thresholds
    resid = abs(indifference_gap(p, dist, eq.schedule, eq.t_h))
    lo, hi = dist.t_lo + 1e-9, th.t_prime
    below = np.linspace(lo, eq.t_h, points + 1)[:-1]
    above = np.linspace(eq.t_h, hi, points + 1)[1:]
    below_vals = gap_profile(p, dist, eq.schedule, below) if below.size else np.zeros(0)
    above_vals = gap_profile(p, dist, eq.schedule, above) if above.size else np.zeros(0)
    shape_ok = bool(np.all(below_vals < 0) and np.all(above_vals > 0))
    details = {"residual": resid, "shape_ok": shape_ok}
    ok = resid <= tol and shape_ok
    witness = None
    if not ok:
        if not shape_ok:
            bad = np.concatenate([below[below_vals >= 0], above[above_vals <= 0]])
            witness = (float(bad[0]),)
        else:
            witness = (float(eq.t_h),)
    return CheckRecord("indifference", PASS if ok else FAIL, resid, witness, tol, details)


# --- first-order conditions -----------------------------------------------------


def _foc(prims, region, m1, t, slope):
    """f_m1 + f_t mu' - c_m1 (- alpha + h'(M - m1) when binding), with mu' = dt/dm1."""
    r = prims.f_m1(m1, t) + prims.f_t(m1, t) * slope - prims.c_m1(m1, t)
    if region == BINDING:
        r = r - prims.alpha + prims.h_prime(prims.budget - m1)
    return np.abs(r)


def _segment_residuals(eq, path, region, t_from, t_to, types):
    """Residuals at interior path nodes and at grid types strictly inside (t_from, t_to)."""
    if path is None or t_to <= t_from:
        return np.zeros(0), np.zeros(0)
    p = eq.prims
    inner = (path.t > t_from) & (path.t < t_to)
    inner[0] = inner[-1] = False
    node_r = _foc(p, region, path.m1[inner], path.t[inner], path.slope[inner])
    tt = types[(types > t_from) & (types < t_to)]
    mm = path.m1_of_t(tt)
    grid_r = _foc(p, region, mm, tt, path.dt_dm(mm))
    return np.concatenate([node_r, grid_r]), np.concatenate([path.t[inner], tt])


def bottom_residual(eq):
    """KKT residual of the lowest type's full-information problem."""
    p, th = eq.prims, eq.thresholds
    t0 = eq.dist.t_lo
    m1 = th.m1_low
    M = p.budget
    if th.t_ell > t0:
        g = float(p.f_m1(m1, t0) - p.c_m1(m1, t0))
        r2 = abs(p.alpha - float(p.h_prime(th.m2_circ)))
    else:
        g = float(p.f_m1(m1, t0) - p.c_m1(m1, t0) - p.alpha + p.h_prime(M - m1))
        r2 = 0.0
    if m1 <= 0.0:
        r1 = max(g, 0.0)
    elif m1 >= M:
        r1 = max(-g, 0.0)
    else:
        r1 = abs(g)
    return max(r1, r2)


def verify_foc_residuals(eq, type_grid=None, tol=FOC_TOL, bottom_tol=FOC_BOTTOM_TOL):
    types = _grid(eq, type_grid)
    th = eq.thresholds
    top = eq.t_h if eq.has_pool else eq.dist.t_hi
    t_lo = eq.dist.t_lo
    r_s, w_s = _segment_residuals(eq, eq.slack_path, SLACK, t_lo, min(th.t_ell, top), types)
    r_b, w_b = _segment_residuals(eq, eq.binding_path, BINDING, th.t_ell, top, types)
    res = np.concatenate([r_s, r_b])
    where = np.concatenate([w_s, w_b])
    worst = float(res.max()) if res.size else 0.0
    r0 = bottom_residual(eq)
    details = {"slack_max": float(r_s.max()) if r_s.size else 0.0,
               "binding_max": float(r_b.max()) if r_b.size else 0.0,
               "bottom": r0, "points": int(res.size)}
    ok = worst <= tol and r0 <= bottom_tol
    witness = None
    if not ok:
        witness = (float(where[np.argmax(res)]),) if worst > tol else (t_lo,)
    return CheckRecord("foc", PASS if ok else FAIL, worst, witness, tol, details)


# --- beliefs ----------------------------------------------------------------------


def verify_reasonable(eq, sample_count=2000, seed=0):
    r = d1mod.check_reasonable(eq, sample_count, seed)
    return CheckRecord("reasonable", PASS if r.passed else FAIL, r.worst, r.witness, 0.0, {"pairs": r.count})


def verify_d1(eq, n=d1mod.OFF_PATH_GRID):
    r = d1mod.check_d1_consistency(eq, n)
    step = float(np.max(np.diff(eq.type_grid)))
    return CheckRecord("d1", PASS if r.passed else FAIL, r.worst, r.witness, step, {"messages": r.count})


def verify_all(eq, seed=0, n_types=IC_TYPES, n_messages=IC_MESSAGES, ic_tol=IC_TOL):
    return VerificationReport([
        verify_monotone(eq),
        verify_ic(eq, n_types, n_messages, ic_tol),
        verify_structure(eq),
        verify_indifference(eq),
        verify_foc_residuals(eq),
        verify_reasonable(eq, seed=seed),
        verify_d1(eq),
    ])
