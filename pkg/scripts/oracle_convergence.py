"""Discrete oracle against the continuous equilibrium on refining grids.

    python scripts/oracle_convergence.py --budget 2 --sizes 100 200 400 800 1600
"""
import argparse

from budget_signaling.equilibrium import solve
from budget_signaling.model import quad_family, uniform
from budget_signaling.oracle import compare, discrete_riley, epsilon_equilibrium_check


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--budget", type=float, default=2.0)
    p.add_argument("--sizes", type=int, nargs="+", default=[100, 200, 400, 800, 1600])
    args = p.parse_args(argv)
    prims, dist = quad_family(args.budget), uniform(1.0, 3.0)
    eq = solve(prims, dist)
    print(f"regime {eq.regime.value}, t_h = {eq.t_h}")
    print(f"{'n':>6s} {'m1 dev':>10s} {'m1 steps':>9s} {'m2 steps':>9s} {'pool steps':>11s} {'epsilon':>10s}")
    prev = None
    for n in args.sizes:
        alloc = discrete_riley(prims, dist, n, n)
        c = compare(eq, alloc)
        eps = epsilon_equilibrium_check(alloc, prims, dist)
        pool = "-" if c.pool_steps is None else f"{c.pool_steps:.2f}"
        ratio = "" if prev is None else f"  shrink {prev / c.m1_dev:.2f}"
        print(f"{n:6d} {c.m1_dev:10.2e} {c.m1_steps:9.2f} {c.m2_steps:9.2f} {pool:>11s} {eps:10.2e}{ratio}")
        prev = c.m1_dev


if __name__ == "__main__":
    main()
