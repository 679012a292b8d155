"""Monte Carlo validation of settling-time and excursion bounds.

Settling times are estimated by the censored mean E[min(tau, t_max)],
which never exceeds E[tau]; comparing it one-sidedly against a certified
bound is therefore valid without distributional assumptions.  Excursion
probabilities P(sup_t V(x_t) >= lambda) are compared against the
supermartingale bound 2 V(x0)/lambda, and mean-V trajectories are checked
for monotone decrease up to sampling error plus an explicit O(dt)
discretization allowance (Euler-Maruyama does not exactly preserve the
supermartingale property).

All statistics are merged in path-index order, so results are identical
for any worker count.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .expr import Expr, evaluate
from .lyap import SdeModel
from .sim import BatchResult, SimParams, run_batch


class EstimationError(Exception):
    pass


def _chunks(n_paths: int, n_workers: int) -> list[range]:
    n_workers = max(1, min(n_workers, n_paths))
    bounds = np.linspace(0, n_paths, n_workers + 1).astype(int)
    return [range(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def _run_chunk(job) -> BatchResult:
    model, x0, params, master_seed, chunk, kwargs = job
    return run_batch(model, x0, params, master_seed, chunk, **kwargs)[0]


def _run_paths(
    model: SdeModel,
    x0,
    params: SimParams,
    n_paths: int,
    master_seed: int,
    n_workers: int,
    **kwargs,
) -> BatchResult:
    """Run paths 0..n-1 split into contiguous chunks, merged in index order.

    Chunks go to separate processes; per-path Philox streams make the
    result independent of the split, so any worker count reproduces the
    single-worker output bit for bit.
    """
    if n_paths < 2:
        raise EstimationError("need n_paths >= 2")
    chunks = _chunks(n_paths, n_workers)
    if len(chunks) == 1:
        result, _ = run_batch(model, x0, params, master_seed, chunks[0], **kwargs)
        return result
    jobs = [(model, x0, params, master_seed, c, kwargs) for c in chunks]
    with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
        parts = list(pool.map(_run_chunk, jobs))
    return BatchResult(
        path_indices=np.concatenate([p.path_indices for p in parts]),
        hit_steps=np.concatenate([p.hit_steps for p in parts]),
        absorbed=np.concatenate([p.absorbed for p in parts]),
        diverged=np.concatenate([p.diverged for p in parts]),
        dt=params.dt,
        t_max=params.t_max,
        vmax=(
            np.concatenate([p.vmax for p in parts])
            if parts[0].vmax is not None
            else None
        ),
        checkpoint_values=(
            np.concatenate([p.checkpoint_values for p in parts], axis=1)
            if parts[0].checkpoint_values is not None
            else None
        ),
    )


@dataclass
class SettlingStats:
    n_paths: int
    n_absorbed: int
    n_diverged: int
    censored_mean: float
    se: float
    ci95_halfwidth: float
    max_hitting_time: Optional[float]
    bound: Optional[float]
    bound_passed: Optional[bool]
    valid: bool
    censored_times: np.ndarray
    absorbed: np.ndarray

    @property
    def absorbed_fraction(self) -> float:
        return self.n_absorbed / self.n_paths


def estimate_settling(
    model: SdeModel,
    x0,
    params: SimParams,
    n_paths: int,
    master_seed: int,
    bound: Optional[float] = None,
    n_workers: int = 1,
) -> SettlingStats:
    """Censored-mean settling-time estimate over paths 0..n_paths-1.

    The bound verdict is the one-sided test censored_mean <= bound + 3 se;
    any diverged path marks the whole run invalid.
    """
    res = _run_paths(model, x0, params, n_paths, master_seed, n_workers)
    censored = res.hitting_times()
    mean = float(censored.mean())
    se = float(censored.std(ddof=1) / np.sqrt(n_paths))
    n_div = int(res.diverged.sum())
    hit = res.hit_steps >= 0
    passed = None if bound is None else bool(mean <= bound + 3.0 * se)
    valid = n_div == 0
    if not valid:
        passed = False if bound is not None else None
    return SettlingStats(
        n_paths=n_paths,
        n_absorbed=int(res.absorbed.sum()),
        n_diverged=n_div,
        censored_mean=mean,
        se=se,
        ci95_halfwidth=1.96 * se,
        max_hitting_time=float(censored[hit].max()) if hit.any() else None,
        bound=bound,
        bound_passed=passed,
        valid=valid,
        censored_times=censored,
        absorbed=res.absorbed,
    )


def wilson_interval(count: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if n == 0:
        return 0.0, 1.0
    phat = count / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * np.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    # the score interval contains the point estimate; keep that under rounding
    return max(0.0, min(center - half, phat)), min(1.0, max(center + half, phat))


@dataclass
class ProbEstimate:
    events: int
    n_paths: int
    estimate: float
    wilson_low: float
    wilson_high: float
    bound: float
    passed: bool
    valid: bool


def estimate_exceedance(
    model: SdeModel,
    V: Expr,
    x0,
    level_lambda: float,
    params: SimParams,
    n_paths: int,
    master_seed: int,
    n_workers: int = 1,
) -> ProbEstimate:
    """Estimate P(sup_{t <= t_max} V(x_t) >= lambda) against 2 V(x0)/lambda.

    The theoretical bound clamps at 1; the check passes when the Wilson
    lower confidence bound does not exceed it.
    """
    if level_lambda <= 0:
        raise ValueError("level must be > 0")
    res = _run_paths(
        model, x0, params, n_paths, master_seed, n_workers,
        v_expr=V, track_vmax=True,
    )
    events = int((res.vmax >= level_lambda).sum())
    lo, hi = wilson_interval(events, n_paths)
    v0 = evaluate(V, np.asarray(x0, dtype=float))
    bound = min(1.0, 2.0 * v0 / level_lambda)
    valid = not bool(res.diverged.any())
    return ProbEstimate(
        events=events,
        n_paths=n_paths,
        estimate=events / n_paths,
        wilson_low=lo,
        wilson_high=hi,
        bound=bound,
        passed=bool(lo <= bound) and valid,
        valid=valid,
    )


@dataclass
class SupermartingaleCheck:
    checkpoints: np.ndarray
    means: np.ndarray
    ses: np.ndarray
    allowance: float  # C * dt
    allowance_coeff: float
    passed: bool
    valid: bool


def empirical_supermartingale(
    model: SdeModel,
    V: Expr,
    x0,
    checkpoints: Sequence[float],
    params: SimParams,
    n_paths: int,
    master_seed: int,
    allowance_coeff: Optional[float] = None,
    n_workers: int = 1,
) -> SupermartingaleCheck:
    """Check that mean V(x_t) is non-increasing across checkpoints.

    Pass requires mean_{k+1} <= mean_k + 2 (se_k + se_{k+1}) + C dt for all
    consecutive checkpoints; C defaults to 10 (1 + V(x0)) as a scale for
    the one-step Euler-Maruyama bias and is recorded in the result.
    """
    cps = np.asarray(sorted(checkpoints), dtype=float)
    if cps[0] < 0 or cps[-1] > params.t_max + 1e-12:
        raise ValueError("checkpoints must lie in [0, t_max]")
    steps = np.rint(cps / params.dt).astype(np.int64)
    res = _run_paths(
        model, x0, params, n_paths, master_seed, n_workers,
        v_expr=V, checkpoint_steps=steps,
    )
    vals = res.checkpoint_values
    means = vals.mean(axis=1)
    ses = vals.std(axis=1, ddof=1) / np.sqrt(n_paths)
    if allowance_coeff is None:
        allowance_coeff = 10.0 * (1.0 + evaluate(V, np.asarray(x0, dtype=float)))
    allowance = allowance_coeff * params.dt
    ok = all(
        means[k + 1] <= means[k] + 2.0 * (ses[k] + ses[k + 1]) + allowance
        for k in range(len(cps) - 1)
    )
    valid = not bool(res.diverged.any())
    return SupermartingaleCheck(
        checkpoints=cps,
        means=means,
        ses=ses,
        allowance=allowance,
        allowance_coeff=allowance_coeff,
        passed=bool(ok) and valid,
        valid=valid,
    )


# ---------------------------------------------------------------------------
# serialization


def _verdict_str(passed: Optional[bool]) -> Optional[str]:
    if passed is None:
        return None
    return "pass" if passed else "fail"


def stats_record(run_id: str, kind: str, estimate: float, se: float,
                 bound: Optional[float], passed: Optional[bool]) -> str:
    """One JSON-lines record: {run_id, kind, estimate, se, bound, verdict}."""
    return json.dumps(
        {
            "run_id": run_id,
            "kind": kind,
            "estimate": estimate,
            "se": se,
            "bound": bound,
            "verdict": _verdict_str(passed),
        }
    )


def settling_records(run_id: str, stats: SettlingStats) -> list[str]:
    lines = [
        stats_record(run_id, "settling_censored_mean", stats.censored_mean,
                     stats.se, stats.bound, stats.bound_passed),
        stats_record(run_id, "absorbed_fraction", stats.absorbed_fraction,
                     float(np.sqrt(stats.absorbed_fraction
                                   * (1 - stats.absorbed_fraction) / stats.n_paths)),
                     None, None),
    ]
    return lines


def exceedance_records(run_id: str, est: ProbEstimate) -> list[str]:
    se = float(np.sqrt(max(est.estimate * (1 - est.estimate), 0.0) / est.n_paths))
    return [stats_record(run_id, "exceedance_probability", est.estimate, se,
                         est.bound, est.passed)]


def supermartingale_records(run_id: str, chk: SupermartingaleCheck) -> list[str]:
    lines = []
    for t, mean, se in zip(chk.checkpoints, chk.means, chk.ses):
        lines.append(stats_record(run_id, f"mean_V_at_t={t:g}", float(mean),
                                  float(se), None, None))
    lines.append(stats_record(run_id, "supermartingale_monotone",
                              float(chk.passed), 0.0, chk.allowance, chk.passed))
    return lines


def write_hitting_csv(fp, stats: SettlingStats) -> None:
    """Per-path hitting times; the time cell is empty for unabsorbed paths."""
    fp.write("path_index,hitting_time,absorbed\n")
    for i, (t, a) in enumerate(zip(stats.censored_times, stats.absorbed)):
        cell = f"{t:.17g}" if a else ""
        fp.write(f"{i},{cell},{1 if a else 0}\n")
