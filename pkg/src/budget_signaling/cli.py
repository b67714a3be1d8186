"""Command-line front end.

    python -m budget_signaling.cli <command> --config run.yaml [--out DIR] [--workers N] [--seed N]

Commands: validate, solve, verify, sweep, export.  Exit status is 0 when
everything passes, 2 when a check or the solver fails, 1 on bad input.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .config import load_config
from .equilibrium import solve
from .errors import SchemaError, SignalingError
from .model import validate_assumptions
from .oracle import compare, discrete_riley
from .verifier import verify_all, verify_structure

log = logging.getLogger("budget_signaling")

EXIT_OK, EXIT_INPUT, EXIT_FAIL = 0, 1, 2
CSV_HEADER = ("t", "m1", "m2", "wage", "utility", "region")
ORACLE_STEPS = 5.0


def _fmt(x):
    return "%.17g" % x


def _tag(cfg, budget):
    return "" if len(cfg.budgets) == 1 else f"_M{budget:g}"


def _solve(cfg, budget):
    return solve(cfg.primitives(budget), cfg.type_distribution(), cfg.ode_rtol, cfg.ode_atol, cfg.type_grid)


def schedule_rows(eq):
    t = eq.type_grid
    m1, m2 = eq.schedule_at(t)
    wage = eq.wage_at(m1, m2)
    u = eq.utility(t)
    region = eq.region_at(t)
    order = np.argsort(t, kind="stable")
    return [(t[i], m1[i], m2[i], wage[i], u[i], region[i]) for i in order]


def write_csv(eq, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in schedule_rows(eq):
            w.writerow([_fmt(v) for v in row[:5]] + [row[5]])


def _summary(eq):
    out = {"budget": eq.prims.budget, "thresholds": eq.thresholds.to_dict()}
    if eq.has_pool:
        out["pooled_wage"] = eq.pooled_wage
    return out


def _write_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _verify(cfg, eq, seed):
    return verify_all(eq, seed=seed, n_types=cfg.ic_types, n_messages=cfg.message_grid, ic_tol=cfg.ic_tolerance)


def _oracle(cfg, eq):
    alloc = discrete_riley(eq.prims, eq.dist, cfg.oracle_types, cfg.oracle_signals)
    cmp = compare(eq, alloc)
    steps = [cmp.m1_steps, cmp.m2_steps] + ([] if cmp.pool_steps is None else [cmp.pool_steps])
    d = dataclasses.asdict(cmp)
    d.update(m1_steps=cmp.m1_steps, m2_steps=cmp.m2_steps, pool_steps=cmp.pool_steps,
             passed=bool(max(steps) <= ORACLE_STEPS))
    return d


# --- commands ---------------------------------------------------------------------


def cmd_validate(cfg, args):
    ok = True
    for M in cfg.budgets:
        rep = validate_assumptions(cfg.primitives(M), cfg.type_distribution())
        ok &= rep.passed
        print(f"M={M:g}: {'pass' if rep.passed else 'FAIL ' + ', '.join(rep.failures())}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_solve(cfg, args):
    os.makedirs(args.out, exist_ok=True)
    for M in cfg.budgets:
        eq = _solve(cfg, M)
        write_csv(eq, os.path.join(args.out, f"schedule{_tag(cfg, M)}.csv"))
        _write_json(_summary(eq), os.path.join(args.out, f"thresholds{_tag(cfg, M)}.json"))
        print(f"M={M:g}: {eq.regime.value}")
    return EXIT_OK


def cmd_verify(cfg, args):
    os.makedirs(args.out, exist_ok=True)
    ok = True
    for M in cfg.budgets:
        eq = _solve(cfg, M)
        rep = _verify(cfg, eq, args.seed)
        orc = _oracle(cfg, eq)
        ok &= rep.passed and orc["passed"]
        _write_json({**_summary(eq), "report": rep.to_dict(), "oracle": orc},
                    os.path.join(args.out, f"report{_tag(cfg, M)}.json"))
        for c in rep.checks:
            print(f"M={M:g} {c.name:13s} {c.status:4s} worst={c.worst:.3g}")
        print(f"M={M:g} oracle        {'pass' if orc['passed'] else 'fail'} "
              f"m1={orc['m1_steps']:.2f} m2={orc['m2_steps']:.2f} steps")
    return EXIT_OK if ok else EXIT_FAIL


def sweep_job(cfg, M):
    """One summary row; solver errors become a row, not an exception."""
    row = {"M": M, "regime": "", "m2_circ": None, "t_ell": None, "t_h": None, "t_prime": None,
           "structure": "", "error": ""}
    try:
        eq = _solve(cfg, M)
    except SignalingError as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row
    th = eq.thresholds
    row.update(regime=th.regime.value, m2_circ=th.m2_circ, t_ell=th.t_ell, t_h=th.t_h, t_prime=th.t_prime,
               structure=verify_structure(eq).status)
    return row


def cmd_sweep(cfg, args):
    os.makedirs(args.out, exist_ok=True)
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(sweep_job, [cfg] * len(cfg.budgets), cfg.budgets))
    else:
        rows = [sweep_job(cfg, M) for M in cfg.budgets]
    cols = list(rows[0])
    with open(os.path.join(args.out, "sweep.csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow(["" if r[k] is None else (_fmt(r[k]) if isinstance(r[k], float) else r[k]) for k in cols])
    for r in rows:
        print(f"M={r['M']:g}: {r['regime'] or r['error']} {r['structure']}")
    ok = all(not r["error"] and r["structure"] == "pass" for r in rows)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_export(cfg, args):
    os.makedirs(args.out, exist_ok=True)
    ok = True
    for M in cfg.budgets:
        eq = _solve(cfg, M)
        rep = _verify(cfg, eq, args.seed)
        ok &= rep.passed
        write_csv(eq, os.path.join(args.out, f"schedule{_tag(cfg, M)}.csv"))
        _write_json({**_summary(eq), "report": rep.to_dict()}, os.path.join(args.out, f"equilibrium{_tag(cfg, M)}.json"))
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {"validate": cmd_validate, "solve": cmd_solve, "verify": cmd_verify,
            "sweep": cmd_sweep, "export": cmd_export}


def build_parser():
    p = argparse.ArgumentParser(prog="budget-signaling", description=__doc__.split("\n")[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="YAML run configuration")
    p.add_argument("--out", default=None, help="output directory (overrides the config)")
    p.add_argument("--workers", type=int, default=None, help="parallel sweep jobs")
    p.add_argument("--seed", type=int, default=None, help="seed for sampled checks")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args.config)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    args.out = args.out or cfg.out_dir
    args.workers = cfg.workers if args.workers is None else args.workers
    args.seed = cfg.seed if args.seed is None else args.seed
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        return COMMANDS[args.command](cfg, args)
    except SignalingError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
