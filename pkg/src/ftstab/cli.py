"""Command-line interface: certify, simulate, estimate, examples.

Exit codes: 0 on success/pass, 1 when a certificate or bound check fails,
2 on usage or configuration errors.  Output files land in --out (default
current directory): report.json, paths_<i>.csv, stats.jsonl,
hitting_times.csv.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

from .certify import CertifyError, certify
from .config import ConfigError, RunConfig, load_config
from .mc import (
    EstimationError,
    empirical_supermartingale,
    estimate_exceedance,
    estimate_settling,
    exceedance_records,
    settling_records,
    supermartingale_records,
    write_hitting_csv,
)
from .presets import PRESETS, preset_config
from .sim import SimulationError, simulate


class UsageError(Exception):
    pass


def _add_shared(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML run configuration")
    p.add_argument("--example", help="built-in preset name (overrides --config)")
    p.add_argument("--seed", type=int, help="master seed override")
    p.add_argument("--out", default=".", help="output directory (default: .)")
    p.add_argument("--n", type=int, help="number of paths")
    p.add_argument("--dt", type=float, help="time step override")
    p.add_argument("--tmax", type=float, help="horizon override")
    p.add_argument("--eps", type=float, help="absorption radius override")
    p.add_argument("--c", type=float, help="certificate constant c override")
    p.add_argument("--gamma", type=float, help="gauge exponent override")
    p.add_argument("--k", choices=["power", "powersum"], help="gauge family override")
    p.add_argument("--alpha", type=float, help="powersum gauge alpha override")
    p.add_argument("--x0", help="initial state override, comma-separated")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ftstab",
        description="finite-time stability certificates and Monte Carlo validation "
        "for stochastic nonlinear systems",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("certify", help="check a certificate and settling bound")
    _add_shared(p)
    p.add_argument("--tol", type=float, default=1e-9, help="margin tolerance")

    p = sub.add_parser("simulate", help="simulate paths and write CSV trajectories")
    _add_shared(p)
    p.add_argument("--stride", type=int, help="steps per recorded sample")

    p = sub.add_parser("estimate", help="Monte Carlo statistics vs certified bounds")
    _add_shared(p)
    p.add_argument(
        "--kind",
        choices=["settling", "exceedance", "supermartingale"],
        default="settling",
    )
    p.add_argument("--level", type=float, help="exceedance level for V")
    p.add_argument("--checkpoints", default="0,0.5,1,2,4",
                   help="comma-separated checkpoint times")
    p.add_argument("--workers", type=int, default=1)

    sub.add_parser("examples", help="list built-in example systems")
    return parser


def _resolve_config(args) -> RunConfig:
    if args.example:
        try:
            cfg = preset_config(args.example)
        except KeyError as e:
            raise UsageError(str(e)) from e
    elif args.config:
        cfg = load_config(args.config)
    else:
        raise UsageError("provide --example <name> or --config <file>")

    if args.seed is not None:
        cfg.simulation.seed = args.seed
    if args.n is not None:
        cfg.simulation.n_paths = args.n
    if args.dt is not None:
        cfg.simulation.dt = args.dt
    if args.tmax is not None:
        cfg.simulation.t_max = args.tmax
    if args.eps is not None:
        cfg.simulation.absorb_eps = args.eps
    if args.c is not None:
        cfg.certificate.c = args.c
    if args.gamma is not None:
        cfg.certificate.gamma = args.gamma
    if args.k is not None:
        cfg.certificate.k_family = args.k
    if args.alpha is not None:
        cfg.certificate.alpha = args.alpha
    if args.x0 is not None:
        try:
            cfg.simulation.x0 = [float(v) for v in args.x0.split(",")]
        except ValueError as e:
            raise UsageError(f"bad --x0 value {args.x0!r}") from e
    if getattr(args, "stride", None) is not None:
        cfg.simulation.output_stride = args.stride
    cfg.validate()
    return cfg


def _ensure_out(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def cmd_certify(args) -> int:
    cfg = _resolve_config(args)
    verdict = certify(
        cfg.build_model(),
        cfg.v_expr(),
        U=cfg.u_expr(),
        K=cfg.gauge(),
        c=cfg.certificate.c,
        domain=cfg.domain(),
        x0=cfg.simulation.x0,
        tol=args.tol,
    )
    print(verdict.summary())
    out = _ensure_out(args)
    with open(os.path.join(out, "report.json"), "w") as fp:
        json.dump(verdict.to_dict(), fp, indent=2, sort_keys=True)
        fp.write("\n")
    return 0 if verdict.certified else 1


def cmd_simulate(args) -> int:
    cfg = _resolve_config(args)
    model = cfg.build_model()
    params = cfg.sim_params()
    n = args.n if args.n is not None else 1
    out = _ensure_out(args)
    for i in range(n):
        path = simulate(model, cfg.simulation.x0, params, cfg.simulation.seed, i)
        fname = os.path.join(out, f"paths_{i}.csv")
        with open(fname, "w") as fp:
            path.write_csv(fp)
        status = (
            f"absorbed at t={path.hitting_time:g}" if path.absorbed
            else "diverged" if path.diverged else "ran to horizon"
        )
        print(f"path {i}: {status} -> {fname}")
    return 0


def _certified_bound(cfg: RunConfig) -> tuple[Optional[float], Optional[float]]:
    """(c_used, settling bound at x0) from the config's certificate, if any."""
    try:
        verdict = certify(
            cfg.build_model(),
            cfg.v_expr(),
            U=cfg.u_expr(),
            K=cfg.gauge(),
            c=cfg.certificate.c,
            domain=cfg.domain(),
            x0=cfg.simulation.x0,
        )
    except CertifyError:
        return None, None
    if not verdict.certified:
        return None, None
    return verdict.c_used, verdict.bound


def cmd_estimate(args) -> int:
    cfg = _resolve_config(args)
    model = cfg.build_model()
    params = cfg.sim_params()
    sim = cfg.simulation
    out = _ensure_out(args)
    run_id = f"{model.name or 'model'}-{args.kind}-seed{sim.seed}"
    lines: list[str]
    passed: Optional[bool]

    if args.kind == "settling":
        _, bound = _certified_bound(cfg)
        stats = estimate_settling(
            model, sim.x0, params, sim.n_paths, sim.seed,
            bound=bound, n_workers=args.workers,
        )
        lines = settling_records(run_id, stats)
        passed = stats.bound_passed if bound is not None else stats.valid
        with open(os.path.join(out, "hitting_times.csv"), "w") as fp:
            write_hitting_csv(fp, stats)
        print(
            f"censored mean settling time: {stats.censored_mean:.6g} (se {stats.se:.3g}), "
            f"absorbed {stats.n_absorbed}/{stats.n_paths}"
            + (f", bound {bound:.6g}" if bound is not None else "")
        )
    elif args.kind == "exceedance":
        if args.level is None:
            raise UsageError("--level is required for exceedance")
        est = estimate_exceedance(
            model, cfg.v_expr(), sim.x0, args.level, params,
            sim.n_paths, sim.seed, n_workers=args.workers,
        )
        lines = exceedance_records(run_id, est)
        passed = est.passed
        print(
            f"P(sup V >= {args.level:g}) ~ {est.estimate:.4f} "
            f"[{est.wilson_low:.4f}, {est.wilson_high:.4f}], bound {est.bound:.4f}"
        )
    else:
        cps = [float(v) for v in args.checkpoints.split(",")]
        target = cfg.u_expr() or cfg.v_expr()
        chk = empirical_supermartingale(
            model, target, sim.x0, cps, params, sim.n_paths, sim.seed,
            n_workers=args.workers,
        )
        lines = supermartingale_records(run_id, chk)
        passed = chk.passed
        for t, m, s in zip(chk.checkpoints, chk.means, chk.ses):
            print(f"t={t:g}: mean V = {m:.6g} (se {s:.3g})")
        print(f"monotone within tolerance: {chk.passed}")

    with open(os.path.join(out, "stats.jsonl"), "w") as fp:
        fp.write("\n".join(lines) + "\n")
    return 0 if passed else 1


def cmd_examples(_args) -> int:
    for name, preset in sorted(PRESETS.items()):
        sim = preset.config.simulation
        print(f"{name}  [{preset.route} route]")
        print(f"    {preset.description}")
        print(
            f"    defaults: x0={sim.x0}, dt={sim.dt:g}, t_max={sim.t_max:g}, "
            f"n_paths={sim.n_paths}, seed={sim.seed}"
        )
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    handlers = {
        "certify": cmd_certify,
        "simulate": cmd_simulate,
        "estimate": cmd_estimate,
        "examples": cmd_examples,
    }
    try:
        return handlers[args.verb](args)
    except (UsageError, ConfigError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (CertifyError, SimulationError, EstimationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
