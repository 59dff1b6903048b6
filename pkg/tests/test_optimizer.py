"""Gamma-descent tests: gradient oracle, bold-driver bookkeeping, termination."""

from __future__ import annotations

import math

import numpy as np
import pytest
from conftest import assert_trace_invariants

from oksvm.dataset import Dataset, SyntheticConfig, generate_synthetic
from oksvm.errors import DataError
from oksvm.kernel import rbf_kernel_matrix, squared_distance_matrix
from oksvm.optimizer import (
    OksvmConfig,
    OptimizerState,
    TraceRecord,
    dual_gamma_gradient,
    export_trace_csv,
    gamma_step,
    train_oksvm,
    train_svm_baseline,
)
from oksvm.solver import SolverConfig, _project_box_equality, dual_objective, solve_dual


def _two_point():
    return Dataset(np.array([[0.0, 0.0], [1.0, 0.0]]), np.array([1, -1]))


def _feasible_instance(seed, n=6, dim=3):
    rng = np.random.default_rng(seed)
    feats = rng.standard_normal((n, dim))
    labels = np.ones(n, dtype=np.int64)
    labels[rng.permutation(n)[: n // 2]] = -1
    c = float(rng.uniform(0.5, 3.0))
    alphas = _project_box_equality(rng.uniform(0, c, n), labels.astype(float), c)
    gamma = float(rng.uniform(0.05, 5.0))
    return feats, labels, alphas, gamma


class TestOksvmConfig:
    def test_defaults_are_valid(self):
        cfg = OksvmConfig()
        assert cfg.zeta_plus == 1.01
        assert cfg.zeta_minus == 0.1
        assert cfg.gamma_max == 1000.0
        assert cfg.ws_limit == 5

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"gamma0": 0.0},
            {"eta0": -1.0},
            {"epsilon": 0.0},
            {"zeta_plus": 0.99},
            {"zeta_minus": 1.5},
            {"ws_limit": 0},
            {"gamma0": 2000.0},  # above gamma_max
        ],
    )
    def test_invalid_fields_rejected(self, kwargs):
        with pytest.raises(ValueError):
            OksvmConfig(**kwargs)


class TestDualGammaGradient:
    def test_zero_alphas_give_zero(self):
        feats, labels, _, gamma = _feasible_instance(0)
        d2 = squared_distance_matrix(feats)
        kern = rbf_kernel_matrix(d2, gamma)
        assert dual_gamma_gradient(np.zeros(6), labels, d2, kern) == 0.0

    def test_two_point_closed_form(self):
        # opposite labels, equal alphas: gradient = -a^2 * d2 * k12
        ds = _two_point()
        d2 = squared_distance_matrix(ds.features)
        kern = rbf_kernel_matrix(d2, 1.0)
        a = 1.3
        got = dual_gamma_gradient(np.array([a, a]), ds.labels, d2, kern)
        assert got == pytest.approx(-a * a * 1.0 * math.exp(-1.0), abs=1e-12)

    def test_two_point_gradient_nonpositive(self):
        ds = _two_point()
        d2 = squared_distance_matrix(ds.features)
        for gamma in (0.1, 1.0, 4.0):
            kern = rbf_kernel_matrix(d2, gamma)
            for a in (0.2, 0.9, 2.0):
                assert dual_gamma_gradient(np.array([a, a]), ds.labels, d2, kern) <= 0.0

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_finite_differences(self, seed):
        feats, labels, alphas, gamma = _feasible_instance(seed)
        d2 = squared_distance_matrix(feats)
        kern = rbf_kernel_matrix(d2, gamma)
        got = dual_gamma_gradient(alphas, labels, d2, kern)
        h = 1e-6
        up = dual_objective(alphas, labels, rbf_kernel_matrix(d2, gamma + h))
        down = dual_objective(alphas, labels, rbf_kernel_matrix(d2, gamma - h))
        fd = (up - down) / (2 * h)
        assert got == pytest.approx(fd, rel=1e-5, abs=1e-8)


class TestGammaStep:
    def test_zero_gradient_fixed_point(self):
        assert gamma_step(0.7, 0.01, 0.0) == 0.7

    def test_arithmetic(self):
        assert gamma_step(1.0, 0.01, 10.0) == pytest.approx(0.9, abs=1e-15)

    def test_may_go_negative(self):
        assert gamma_step(0.05, 0.01, 10.0) == pytest.approx(-0.05, abs=1e-15)


class TestTrainOksvm:
    def test_single_class_rejected(self):
        ds = Dataset(np.zeros((4, 2)) + np.arange(4)[:, None], np.array([1, 1, 1, 1]))
        with pytest.raises(DataError, match="single-class"):
            train_oksvm(ds, 1.0)

    def test_rich_trace_obeys_bookkeeping(self):
        # high starting gamma on higher-dimensional data walks through
        # accepts, overshoots, and rejections before converging
        ds = generate_synthetic(SyntheticConfig(100, 8, 1.4, 3))
        cfg = OksvmConfig(gamma0=2.1)
        model, state = train_oksvm(ds, 1.0, cfg)
        events = {r.event for r in state.trace}
        assert "accepted" in events
        assert "overshoot" in events
        assert_trace_invariants(state, cfg)
        assert state.terminated_by == "converged"
        assert state.gamma_t < cfg.gamma0  # the width was actually learned
        assert model.gamma == state.gamma_t

    def test_first_overshoot_converges_at_start(self):
        # when the very first proposal already overshoots, gamma_f still
        # equals gamma_t and the run converges at gamma0 after one step
        ds = generate_synthetic(SyntheticConfig(60, 2, 1.0, 5))
        cfg = OksvmConfig(gamma0=0.5)
        model, state = train_oksvm(ds, 1.0, cfg)
        assert state.terminated_by == "converged"
        assert state.t == 1
        assert state.gamma_t == 0.5
        assert state.trace[-1].event == "overshoot"
        assert state.trace[-1].eta == cfg.eta0  # terminal overshoot keeps eta
        assert_trace_invariants(state, cfg)

    def test_nonpositive_proposals_cut_eta(self):
        ds = generate_synthetic(SyntheticConfig(60, 2, 1.0, 5))
        cfg = OksvmConfig(gamma0=1.0, eta0=1e6)
        _, state = train_oksvm(ds, 1.0, cfg)
        first = state.trace[1]
        assert first.event == "rejected_nonpositive"
        assert first.gamma == 1.0
        assert first.eta == cfg.zeta_minus * cfg.eta0
        assert_trace_invariants(state, cfg)

    def test_gamma_ceiling_stops_run(self):
        # opposite-label 2-point data has a negative gradient, so gamma
        # grows; a low ceiling must stop the run and keep the last model
        cfg = OksvmConfig(gamma0=1.0, gamma_max=1.5, eta0=10.0)
        model, state = train_oksvm(_two_point(), 10.0, cfg)
        assert state.terminated_by == "gamma_exceeded"
        assert [r.event for r in state.trace] == ["init", "gamma_exceeded"]
        assert state.gamma_t == 1.0
        assert model.gamma == 1.0
        assert_trace_invariants(state, cfg)

    def test_stagnation_guard(self):
        # an absurd tolerance makes every re-solve count as unchanged,
        # so the plateau counter must run out after ws_limit steps
        ds = generate_synthetic(SyntheticConfig(60, 2, 1.0, 5))
        cfg = OksvmConfig(gamma0=0.5, eta0=1e-4, stagnation_rtol=1.0)
        _, state = train_oksvm(ds, 1.0, cfg)
        assert state.terminated_by == "stagnated"
        assert state.ws == cfg.ws_limit
        assert len(state.trace) == 1 + cfg.ws_limit
        assert all(r.event == "stagnation" for r in state.trace[1:])
        assert_trace_invariants(state, cfg)

    def test_step_cap_records_reason(self):
        ds = generate_synthetic(SyntheticConfig(60, 8, 1.4, 3))
        cfg = OksvmConfig(gamma0=2.1, max_outer_steps=3)
        _, state = train_oksvm(ds, 1.0, cfg)
        assert state.terminated_by == "step_cap"
        assert state.t == 3
        assert_trace_invariants(state, cfg)

    def test_zero_steps_equals_baseline(self):
        ds = generate_synthetic(SyntheticConfig(80, 3, 1.2, 7))
        cfg = OksvmConfig(gamma0=0.9, max_outer_steps=0)
        model, state = train_oksvm(ds, 1.0, cfg)
        assert state.terminated_by == "step_cap"
        assert len(state.trace) == 1
        baseline = train_svm_baseline(ds, 1.0, 0.9)
        np.testing.assert_array_equal(model.alphas, baseline.alphas)
        assert model.bias == baseline.bias

    def test_cold_start_reaches_same_region(self):
        ds = generate_synthetic(SyntheticConfig(80, 8, 1.4, 4))
        warm_model, warm_state = train_oksvm(ds, 1.0, OksvmConfig(gamma0=2.1))
        cold_cfg = OksvmConfig(gamma0=2.1, warm_start=False)
        cold_model, cold_state = train_oksvm(ds, 1.0, cold_cfg)
        assert_trace_invariants(cold_state, cold_cfg)
        assert cold_state.terminated_by in ("converged", "stagnated")
        # warm starts change speed, not the destination
        assert cold_state.gamma_t == pytest.approx(warm_state.gamma_t, rel=0.5)

    def test_deterministic(self):
        ds = generate_synthetic(SyntheticConfig(80, 4, 1.0, 9))
        cfg = OksvmConfig(gamma0=1.3)
        a_model, a_state = train_oksvm(ds, 1.0, cfg)
        b_model, b_state = train_oksvm(ds, 1.0, cfg)
        np.testing.assert_array_equal(a_model.alphas, b_model.alphas)
        assert a_state.trace == b_state.trace


class TestTrainSvmBaseline:
    def test_two_point_analytic(self):
        model = train_svm_baseline(_two_point(), 10.0, 1.0)
        np.testing.assert_allclose(
            model.alphas, 1.0 / (1.0 - math.exp(-1.0)), atol=1e-6
        )

    def test_deterministic(self):
        ds = generate_synthetic(SyntheticConfig(60, 2, 1.0, 8))
        a = train_svm_baseline(ds, 1.0, 0.5, SolverConfig(seed=3))
        b = train_svm_baseline(ds, 1.0, 0.5, SolverConfig(seed=3))
        np.testing.assert_array_equal(a.alphas, b.alphas)
        assert a.bias == b.bias


class TestOptimizerState:
    def test_unknown_termination_rejected(self):
        with pytest.raises(ValueError, match="termination"):
            OptimizerState(
                t=0, gamma_t=1.0, gamma_f=1.0, eta=0.01, ws=0,
                trace=(), terminated_by="gave_up",
            )

    def test_accepted_duals_filter(self):
        trace = (
            TraceRecord(0, 1.0, 5.0, 0.01, 0, "init"),
            TraceRecord(1, 0.9, 4.0, 0.0101, 0, "accepted"),
            TraceRecord(2, 0.9, 4.5, 0.0101, 0, "overshoot"),
        )
        state = OptimizerState(
            t=2, gamma_t=0.9, gamma_f=0.9, eta=0.0101, ws=0,
            trace=trace, terminated_by="converged",
        )
        assert state.accepted_duals() == [4.0]


class TestExportTrace:
    def test_csv_round_trip(self, tmp_path):
        ds = generate_synthetic(SyntheticConfig(60, 2, 1.0, 5))
        _, state = train_oksvm(ds, 1.0, OksvmConfig(gamma0=0.5))
        out = tmp_path / "trace.csv"
        export_trace_csv(state.trace, out)
        lines = out.read_text().splitlines()
        assert lines[0] == "t,gamma,dual_value,eta,ws,event"
        assert len(lines) == 1 + len(state.trace)
        for line, record in zip(lines[1:], state.trace):
            t, gamma, dual, eta, ws, event = line.split(",")
            assert int(t) == record.t
            assert float(gamma) == record.gamma  # repr round-trips exactly
            assert float(dual) == record.dual_value
            assert float(eta) == record.eta
            assert int(ws) == record.ws
            assert event == record.event
