#!/usr/bin/env python3
"""Write sample trajectories of the presets as CSV for external plotting.

    python scripts/sample_paths.py --example ex1-case1 --n 5 --out paths/
"""

import argparse
import os
import sys

from ftstab.presets import preset_config
from ftstab.sim import simulate


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--example", default="ex1-case1")
    ap.add_argument("--n", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--stride", type=int, default=100)
    ap.add_argument("--out", default=".")
    args = ap.parse_args()

    cfg = preset_config(args.example)
    cfg.simulation.output_stride = args.stride
    model = cfg.build_model()
    os.makedirs(args.out, exist_ok=True)
    for i in range(args.n):
        path = simulate(model, cfg.simulation.x0, cfg.sim_params(), args.seed, i)
        fname = os.path.join(args.out, f"paths_{i}.csv")
        with open(fname, "w") as fp:
            path.write_csv(fp)
        tag = f"absorbed at t={path.hitting_time:g}" if path.absorbed else "not absorbed"
        print(f"{fname}: {tag}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
