"""Regime tag for each budget of one or more sweep configs.

    python scripts/regime_sweep.py configs/regimes_f1.yaml configs/regimes_f2.yaml
"""
import argparse
import sys

from budget_signaling.cli import sweep_job
from budget_signaling.config import load_config

ALL_TAGS = {"SeparatingNoBinding", "TwoPartSeparating", "AllBindingSeparating",
            "TwoPartWithPool", "KinkAtPool", "AllBindingWithPool"}


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("configs", nargs="+")
    args = p.parse_args(argv)
    seen = set()
    print(f"{'config':28s} {'M':>6s}  {'regime':22s} {'t_ell':>10s} {'t_h':>10s}  structure")
    for path in args.configs:
        cfg = load_config(path)
        for M in cfg.budgets:
            r = sweep_job(cfg, M)
            seen.add(r["regime"])
            fmt = lambda x: f"{x:10.6f}" if x is not None else f"{'-':>10s}"
            print(f"{path:28s} {M:6g}  {r['regime'] or r['error'][:22]:22s} {fmt(r['t_ell'])} {fmt(r['t_h'])}  "
                  f"{r['structure']}")
    missing = sorted(ALL_TAGS - seen)
    print(f"tags covered: {len(ALL_TAGS & seen)}/6" + (f", missing {missing}" if missing else ""))
    return 0 if not missing else 1


if __name__ == "__main__":
    sys.exit(main())
