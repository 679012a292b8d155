"""Absorbing Euler-Maruyama simulator: oracles, determinism, stream quality."""

import io

import numpy as np
import pytest

from ftstab.expr import parse
from ftstab.sim import (
    Path,
    SimParams,
    SimulationError,
    brownian_increments,
    run_batch,
    simulate,
)
from conftest import scalar_model
from oracles import forward_euler, ode_settling_time


class TestSimParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            SimParams(dt=0.0)
        with pytest.raises(ValueError):
            SimParams(dt=1.0, t_max=0.5)
        with pytest.raises(ValueError):
            SimParams(absorb_eps=2.0)

    def test_n_steps(self):
        assert SimParams(dt=1e-4, t_max=2.0).n_steps == 20000


class TestBrownianIncrements:
    def test_deterministic(self):
        a = brownian_increments(5, 3, 2, 1000, 1e-4)
        b = brownian_increments(5, 3, 2, 1000, 1e-4)
        assert np.array_equal(a, b)

    def test_variance_within_3_sigma(self):
        w = brownian_increments(5, 3, 1, 100_000, 1e-4)
        ratio = w.var() / 1e-4
        assert 0.97 <= ratio <= 1.03

    def test_streams_uncorrelated(self):
        a = brownian_increments(5, 0, 1, 100_000, 1e-4).ravel()
        b = brownian_increments(5, 1, 1, 100_000, 1e-4).ravel()
        rho = np.corrcoef(a, b)[0, 1]
        assert abs(rho) < 0.01

    def test_mean_near_zero(self):
        w = brownian_increments(9, 7, 1, 100_000, 1e-2)
        assert abs(w.mean()) < 4 * 0.1 / np.sqrt(100_000)

    def test_distinct_seeds_differ(self):
        a = brownian_increments(1, 0, 1, 64, 1e-4)
        b = brownian_increments(2, 0, 1, 64, 1e-4)
        assert not np.array_equal(a, b)


class TestDeterministicOracle:
    def test_cubic_root_hitting_time(self, det_cubicroot):
        params = SimParams(dt=1e-4, t_max=2.0, absorb_eps=1e-6)
        path = simulate(det_cubicroot, [1.0], params, 0, 0)
        assert path.absorbed
        exact = ode_settling_time(1.0)  # 1.5
        assert path.hitting_time == pytest.approx(exact, abs=5e-3)

    def test_matches_forward_euler_exactly(self, det_cubicroot):
        params = SimParams(dt=1e-3, t_max=0.5, absorb_eps=1e-12, output_stride=1)
        path = simulate(det_cubicroot, [1.0], params, 0, 0)

        def f(x):
            return -np.sign(x) * np.abs(x) ** (1.0 / 3.0)

        euler = forward_euler(f, [1.0], 1e-3, params.n_steps)
        assert np.array_equal(path.states, euler)

    def test_step_refinement(self, det_cubicroot):
        # absorb_eps must dominate the Euler overshoot amplitude (dt/2)^{3/2}
        hits = []
        for dt in (1e-3, 5e-4):
            params = SimParams(dt=dt, t_max=2.0, absorb_eps=1e-4)
            hits.append(simulate(det_cubicroot, [1.0], params, 0, 0).hitting_time)
        assert abs(hits[0] - hits[1]) <= 2e-3


class TestAbsorption:
    def test_permanence(self, ex1_case1):
        params = SimParams(dt=1e-3, t_max=20.0, absorb_eps=1e-5, output_stride=10)
        path = simulate(ex1_case1, [1.2], params, 7, 3)
        assert path.absorbed
        after = path.times >= path.hitting_time
        assert np.all(path.states[after] == 0.0)

    def test_hitting_time_on_grid(self, ex1_case1):
        params = SimParams(dt=1e-3, t_max=20.0, absorb_eps=1e-5)
        path = simulate(ex1_case1, [1.2], params, 7, 3)
        k = path.hitting_time / params.dt
        assert k == pytest.approx(round(k), abs=1e-9)

    def test_initial_state_inside_ball(self, ex1_case1):
        params = SimParams(dt=1e-3, t_max=1.0, absorb_eps=1e-2)
        path = simulate(ex1_case1, [1e-3], params, 0, 0)
        assert path.absorbed and path.hitting_time == 0.0
        assert np.all(path.states == 0.0)


class TestDeterminism:
    def test_bit_identical_repeat(self, ex1_case1):
        params = SimParams(dt=1e-3, t_max=5.0)
        a = simulate(ex1_case1, [1.2], params, 11, 4)
        b = simulate(ex1_case1, [1.2], params, 11, 4)
        assert np.array_equal(a.states, b.states)
        assert a.hitting_time == b.hitting_time

    def test_single_path_equals_batch_row(self, ex1_case1):
        params = SimParams(dt=1e-3, t_max=5.0)
        batch, _ = run_batch(ex1_case1, [1.2], params, 42, range(64))
        for idx in (0, 17, 63):
            single, _ = run_batch(ex1_case1, [1.2], params, 42, [idx])
            assert single.hit_steps[0] == batch.hit_steps[idx]

    def test_distinct_paths_differ(self, ex1_case1):
        params = SimParams(dt=1e-3, t_max=5.0)
        a = simulate(ex1_case1, [1.2], params, 11, 0)
        b = simulate(ex1_case1, [1.2], params, 11, 1)
        assert not np.array_equal(a.states, b.states)


class TestZeroAndDivergence:
    def test_zero_dynamics_constant(self):
        model = scalar_model("0", "0", "frozen")
        path = simulate(model, [1.0], SimParams(dt=1e-3, t_max=1.0), 0, 0)
        assert not path.absorbed and not path.diverged
        assert np.all(path.states == 1.0)

    def test_divergence_guard(self):
        model = scalar_model("spow(x1, 3)", "0", "explosive")
        params = SimParams(dt=1e-3, t_max=5.0, divergence_guard=1e6)
        path = simulate(model, [2.0], params, 0, 0)
        assert path.diverged and not path.absorbed
        assert path.times[-1] < 5.0

    def test_invalid_model_rejected(self, v_square):
        bad = scalar_model("x1 + 1", "0")
        with pytest.raises(SimulationError, match="invalid model"):
            simulate(bad, [1.0], SimParams(dt=1e-3, t_max=1.0), 0, 0)

    def test_bad_x0_rejected(self, ex1_case1):
        with pytest.raises(SimulationError):
            simulate(ex1_case1, [1.0, 2.0], SimParams(dt=1e-3, t_max=1.0), 0, 0)


class TestPathCsv:
    def test_format(self, det_cubicroot):
        params = SimParams(dt=1e-3, t_max=2.0, absorb_eps=1e-4, output_stride=100)
        path = simulate(det_cubicroot, [1.0], params, 0, 0)
        buf = io.StringIO()
        path.write_csv(buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "t,x1,absorbed"
        assert len(lines) == len(path.times) + 1
        first = lines[1].split(",")
        assert float(first[0]) == 0.0 and float(first[1]) == 1.0 and first[2] == "0"
        assert lines[-1].endswith(",1")  # absorbed by the end

    def test_seventeen_significant_digits(self):
        p = Path(
            times=np.array([0.0]),
            states=np.array([[1.0 / 3.0]]),
            absorbed=False,
            hitting_time=None,
            diverged=False,
        )
        buf = io.StringIO()
        p.write_csv(buf)
        assert "0.33333333333333331" in buf.getvalue()


class TestVmaxAndCheckpoints:
    def test_vmax_includes_initial_state(self, det_cubicroot):
        V = parse("x1^2", 1)
        params = SimParams(dt=1e-3, t_max=1.0, absorb_eps=1e-6)
        res, _ = run_batch(
            det_cubicroot, [1.0], params, 0, [0], v_expr=V, track_vmax=True
        )
        # V strictly decreases along the deterministic flow
        assert res.vmax[0] == 1.0

    def test_checkpoint_values_constant_for_frozen_model(self):
        model = scalar_model("0", "0", "frozen")
        V = parse("x1^2", 1)
        params = SimParams(dt=1e-3, t_max=1.0)
        res, _ = run_batch(
            model, [2.0], params, 0, [0, 1],
            v_expr=V, checkpoint_steps=[0, 500, 1000],
        )
        assert np.all(res.checkpoint_values == 4.0)

    def test_censored_hitting_times(self, det_cubicroot):
        params = SimParams(dt=1e-3, t_max=1.0, absorb_eps=1e-6)
        res, _ = run_batch(det_cubicroot, [1.0], params, 0, [0])
        assert res.hitting_times()[0] == 1.0  # not absorbed by t_max=1 < 1.5
