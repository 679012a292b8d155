#!/usr/bin/env python3
"""Monte Carlo settling-time estimates against certified bounds.

Runs the stochastic presets at a chosen path count and prints the censored
mean, standard error, absorbed fraction, and the one-sided bound verdict.

    python scripts/settling_benchmark.py [--n 2000] [--seed 0] [--out stats.jsonl]
"""

import argparse
import sys

from ftstab.certify import certify
from ftstab.mc import estimate_settling, settling_records
from ftstab.presets import preset_config

SYSTEMS = ["ex1-case1", "ex1-case2", "ex1-case3", "ex3", "det-cubicroot"]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", help="append JSON-lines records here")
    args = ap.parse_args()

    lines = []
    all_pass = True
    for name in SYSTEMS:
        cfg = preset_config(name)
        cfg.simulation.seed = args.seed
        verdict = certify(
            cfg.build_model(), cfg.v_expr(), U=cfg.u_expr(), K=cfg.gauge(),
            c=cfg.certificate.c, domain=cfg.domain(), x0=cfg.simulation.x0,
        )
        stats = estimate_settling(
            cfg.build_model(), cfg.simulation.x0, cfg.sim_params(),
            args.n, args.seed, bound=verdict.bound, n_workers=args.workers,
        )
        ok = stats.bound_passed and stats.valid
        all_pass = all_pass and ok
        print(
            f"{name:>14}: mean {stats.censored_mean:8.4f} (se {stats.se:.4f})  "
            f"bound {verdict.bound:8.4f}  absorbed {stats.absorbed_fraction:6.1%}  "
            f"{'pass' if ok else 'FAIL'}"
        )
        lines += settling_records(f"{name}-settling-seed{args.seed}", stats)

    if args.out:
        with open(args.out, "a") as fp:
            fp.write("\n".join(lines) + "\n")
    return 0 if all_pass else 1


if __name__ == "__main__":
    sys.exit(main())
