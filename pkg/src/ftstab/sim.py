"""Euler-Maruyama simulation with an absorbing origin.

Paths follow x_{k+1} = x_k + f(x_k) dt + g(x_k) dB_k on a uniform grid.
Once |x| falls inside the absorption ball the state is set to exactly zero
and held there: the origin is an equilibrium *and* an absorbing state, and
the first grid time inside the ball is the recorded hitting time.

Randomness is counter-based: path i draws from a Philox stream keyed by
(master_seed, i), so every path is a pure function of (master_seed,
path_index) regardless of batching, scheduling, or worker count.

The scheme is explicit Euler-Maruyama even though finite-time-stable
systems are never locally Lipschitz at the origin; coefficients in scope
are continuous with sublinear growth near 0, and the acceptance tests
bound the discretization bias against a deterministic oracle.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .expr import Expr, compile_evaluator
from .lyap import SdeModel, validate_model


class SimulationError(Exception):
    pass


@dataclass(frozen=True)
class SimParams:
    dt: float = 1e-4
    t_max: float = 10.0
    absorb_eps: float = 1e-5
    output_stride: int = 100
    divergence_guard: float = 1e9

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be > 0")
        if self.t_max < self.dt:
            raise ValueError("t_max must be >= dt")
        if not 0 < self.absorb_eps < 1:
            raise ValueError("absorb_eps must be in (0, 1)")
        if self.output_stride < 1:
            raise ValueError("output_stride must be >= 1")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))


@dataclass
class Path:
    """A recorded trajectory (stride-thinned uniform grid)."""

    times: np.ndarray
    states: np.ndarray  # (len(times), dim)
    absorbed: bool
    hitting_time: Optional[float]
    diverged: bool

    def write_csv(self, fp: io.TextIOBase) -> None:
        dim = self.states.shape[1]
        header = "t," + ",".join(f"x{i+1}" for i in range(dim)) + ",absorbed"
        fp.write(header + "\n")
        hit = self.hitting_time if self.hitting_time is not None else np.inf
        for t, row in zip(self.times, self.states):
            cells = [f"{t:.17g}"] + [f"{v:.17g}" for v in row]
            cells.append("1" if self.absorbed and t >= hit else "0")
            fp.write(",".join(cells) + "\n")


def path_generator(master_seed: int, path_index: int) -> np.random.Generator:
    """Counter-based stream for one path; distinct keys are independent."""
    key = np.array([master_seed, path_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def brownian_increments(
    master_seed: int, path_index: int, m: int, n_steps: int, dt: float
) -> np.ndarray:
    """Gaussian increments, shape (n_steps, m), variance dt per component."""
    rng = path_generator(master_seed, path_index)
    return rng.standard_normal((n_steps, m)) * np.sqrt(dt)


@dataclass
class BatchResult:
    """Per-path outcomes of a vectorized batch run (path-index order)."""

    path_indices: np.ndarray
    hit_steps: np.ndarray  # -1 where never absorbed
    absorbed: np.ndarray
    diverged: np.ndarray
    dt: float
    t_max: float
    vmax: Optional[np.ndarray] = None
    checkpoint_values: Optional[np.ndarray] = None  # (n_checkpoints, n_paths)

    def hitting_times(self) -> np.ndarray:
        """Censored at t_max: min(tau, t_max) per path."""
        out = np.full(len(self.hit_steps), self.t_max)
        hit = self.hit_steps >= 0
        out[hit] = self.hit_steps[hit] * self.dt
        return out


_BLOCK = 1024


def run_batch(
    model: SdeModel,
    x0: Sequence[float],
    params: SimParams,
    master_seed: int,
    path_indices: Sequence[int],
    *,
    v_expr: Optional[Expr] = None,
    track_vmax: bool = False,
    checkpoint_steps: Optional[Sequence[int]] = None,
    _record: bool = False,
) -> tuple[BatchResult, Optional[Path]]:
    """Simulate a batch of paths; absorbed paths drop out of the hot loop.

    Results per path are independent of the batch composition: each path
    consumes only its own stream and elementwise updates do not mix rows.
    """
    report = validate_model(model)
    if not report.valid:
        raise SimulationError(f"invalid model: {'; '.join(report.violations)}")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (model.dim,):
        raise SimulationError(f"x0 must have shape ({model.dim},)")
    if not np.all(np.isfinite(x0)):
        raise SimulationError("x0 must be finite")

    dim, m = model.dim, model.brownian_dim
    f_fns = [compile_evaluator(e, dim) for e in model.drift]
    g_fns = [[compile_evaluator(e, dim) for e in row] for row in model.diffusion]
    v_fn = compile_evaluator(v_expr, dim) if v_expr is not None else None

    indices = np.asarray(path_indices, dtype=np.int64)
    P = len(indices)
    n_steps = params.n_steps
    dt, eps, guard = params.dt, params.absorb_eps, params.divergence_guard
    sqrt_dt = np.sqrt(dt)

    x = np.tile(x0, (P, 1))
    absorbed = np.zeros(P, dtype=bool)
    diverged = np.zeros(P, dtype=bool)
    hit_steps = np.full(P, -1, dtype=np.int64)

    cp_steps = np.asarray(sorted(checkpoint_steps), dtype=np.int64) if checkpoint_steps is not None else None
    cp_values = np.zeros((len(cp_steps), P)) if cp_steps is not None else None
    vmax = None

    if np.linalg.norm(x0) <= eps:
        absorbed[:] = True
        hit_steps[:] = 0
        x[:] = 0.0

    if track_vmax:
        vmax = v_fn(x).copy()
    if cp_values is not None and cp_steps.size and cp_steps[0] == 0:
        cp_values[0] = v_fn(x)

    rec = None
    if _record:
        if P != 1:
            raise SimulationError("recording supports exactly one path")
        n_rows = n_steps // params.output_stride + 1
        rec = np.zeros((n_rows, dim))
        rec[0] = x[0]

    rngs = [path_generator(master_seed, int(i)) for i in indices]
    active = np.flatnonzero(~absorbed)
    stop_step = n_steps  # last completed step (shortened only by divergence)

    step = 0
    while step < n_steps and active.size:
        bs = min(_BLOCK, n_steps - step)
        dW = np.empty((active.size, bs, m))
        for row, p in enumerate(active):
            dW[row] = rngs[p].standard_normal((bs, m))
        dW *= sqrt_dt

        alive = np.arange(active.size)
        for s in range(bs):
            idx = active[alive]
            X = x[idx]
            F = f_fns[0](X)[:, None] if dim == 1 else np.column_stack([fn(X) for fn in f_fns])
            dWs = dW[alive, s, :]
            if dim == 1 and m == 1:
                noise = g_fns[0][0](X)[:, None] * dWs
            else:
                G = np.empty((len(idx), dim, m))
                for i in range(dim):
                    for j in range(m):
                        G[:, i, j] = g_fns[i][j](X)
                noise = np.einsum("adm,am->ad", G, dWs)
            Xn = X + F * dt + noise

            norms = np.abs(Xn[:, 0]) if dim == 1 else np.linalg.norm(Xn, axis=1)
            hit = norms <= eps
            blown = ~hit & ((norms >= guard) | ~np.isfinite(norms))
            if hit.any():
                Xn[hit] = 0.0
                gidx = idx[hit]
                absorbed[gidx] = True
                hit_steps[gidx] = step + s + 1
            if blown.any():
                diverged[idx[blown]] = True
            x[idx] = Xn

            gstep = step + s + 1
            if track_vmax:
                vmax[idx] = np.maximum(vmax[idx], v_fn(Xn))
            if cp_values is not None:
                where = np.searchsorted(cp_steps, gstep)
                if where < len(cp_steps) and cp_steps[where] == gstep:
                    cp_values[where] = v_fn(x)
            if rec is not None and gstep % params.output_stride == 0:
                rec[gstep // params.output_stride] = x[0]

            if hit.any() or blown.any():
                if blown.any():
                    stop_step = gstep
                alive = alive[~hit & ~blown]
                if not alive.size:
                    break
        step += bs
        active = active[alive]

    result = BatchResult(
        path_indices=indices,
        hit_steps=hit_steps,
        absorbed=absorbed,
        diverged=diverged,
        dt=dt,
        t_max=params.t_max,
        vmax=vmax,
        checkpoint_values=cp_values,
    )

    path = None
    if _record:
        stride = params.output_stride
        if diverged[0]:
            n_rows = stop_step // stride + 1
            rec = rec[:n_rows]
        times = np.arange(len(rec)) * (stride * dt)
        hitting = float(hit_steps[0] * dt) if hit_steps[0] >= 0 else None
        path = Path(times, rec, bool(absorbed[0]), hitting, bool(diverged[0]))
    return result, path


def simulate(
    model: SdeModel,
    x0: Sequence[float],
    params: SimParams,
    master_seed: int,
    path_index: int,
) -> Path:
    """Simulate one path and record its (stride-thinned) trajectory."""
    _, path = run_batch(
        model, x0, params, master_seed, [path_index], _record=True
    )
    return path
