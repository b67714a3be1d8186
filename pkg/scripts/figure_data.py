"""Schedule data for plotting: m1*, m2*, wage and utility against type.

    python scripts/figure_data.py configs/quad.yaml --out out/figure
Writes one CSV per budget plus the thresholds as JSON; no plotting here.
"""
import argparse
import json
import os

from budget_signaling.cli import _summary, write_csv
from budget_signaling.config import load_config
from budget_signaling.equilibrium import solve


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("config")
    p.add_argument("--out", default="out/figure")
    args = p.parse_args(argv)
    cfg = load_config(args.config)
    os.makedirs(args.out, exist_ok=True)
    for M in cfg.budgets:
        eq = solve(cfg.primitives(M), cfg.type_distribution(), cfg.ode_rtol, cfg.ode_atol, cfg.type_grid)
        stem = os.path.join(args.out, f"figure_M{M:g}")
        write_csv(eq, stem + ".csv")
        with open(stem + ".json", "w", encoding="utf-8") as fh:
            json.dump(_summary(eq), fh, indent=2, sort_keys=True)
        print(f"{stem}.csv  {eq.regime.value}")


if __name__ == "__main__":
    main()
