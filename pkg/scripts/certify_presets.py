#!/usr/bin/env python3
"""Certify every built-in preset and tabulate c_max, c_used, and bounds."""

import sys

from ftstab.certify import certify
from ftstab.presets import PRESETS, preset_config


def main() -> int:
    rows = []
    for name in sorted(PRESETS):
        cfg = preset_config(name)
        verdict = certify(
            cfg.build_model(),
            cfg.v_expr(),
            U=cfg.u_expr(),
            K=cfg.gauge(),
            c=cfg.certificate.c,
            domain=cfg.domain(),
            x0=cfg.simulation.x0,
        )
        rows.append(
            (
                name,
                verdict.route,
                "yes" if verdict.certified else "NO",
                f"{verdict.c_max:.6g}" if verdict.c_max is not None else "-",
                f"{verdict.c_used:.6g}",
                f"{verdict.bound:.6g}" if verdict.bound is not None else "-",
            )
        )
    header = ("preset", "route", "certified", "c_max", "c_used", "E[tau] bound")
    widths = [max(len(r[i]) for r in [header, *rows]) for i in range(len(header))]
    for row in [header, *rows]:
        print("  ".join(cell.ljust(w) for cell, w in zip(row, widths)))
    return 0 if all(r[2] == "yes" for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
