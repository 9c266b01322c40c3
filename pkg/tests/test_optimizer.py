import numpy as np
import pytest
from oracles import finite_difference_gradients

from wsrmax.channel import (
    build_instance,
    evaluate_objective,
    feasibility_check,
    generate_rayleigh_channels,
    random_feasible_covariances,
)
from wsrmax.optimizer import (
    STATUS_CONVERGED,
    STATUS_STALLED,
    LineSearchStalled,
    OptimizerConfig,
    armijo_step,
    cgp_solve,
    deflect,
    default_start,
    gp_solve,
    weighted_gradients,
)
from wsrmax.projection import project_sum_power
from wsrmax.verify import waterfilling_capacity


def make_instance(K, n_t, n_r, seed, power=10.0, weights=None):
    channels = generate_rayleigh_channels(K, n_t, n_r, seed)
    if weights is None:
        weights = np.random.default_rng(seed + 10_000).uniform(0.1, 2.0, size=K)
    return build_instance(channels, weights, power)


class TestWeightedGradients:
    def test_single_user_zero_covariance(self):
        inst = make_instance(1, 3, 2, seed=0, weights=[1.4])
        H = inst.channels.channels[0]
        grad = weighted_gradients(inst, np.zeros((1, 2, 2), dtype=complex))
        assert np.allclose(grad[0], 2.0 * 1.4 * H @ H.conj().T, atol=1e-12)

    def test_zero_weights_zero_gradient(self):
        inst = make_instance(3, 2, 2, seed=1, weights=[0.0, 0.0, 0.0])
        rng = np.random.default_rng(2)
        Q = random_feasible_covariances(3, 2, 10.0, rng)
        assert np.all(weighted_gradients(inst, Q) == 0.0)

    def test_blocks_are_hermitian(self):
        inst = make_instance(4, 3, 2, seed=3)
        rng = np.random.default_rng(4)
        Q = random_feasible_covariances(4, 2, 10.0, rng)
        grad = weighted_gradients(inst, Q)
        assert np.max(np.abs(grad - np.conj(np.swapaxes(grad, -1, -2)))) <= 1e-13

    def test_matches_finite_differences(self):
        for seed in range(3):
            inst = make_instance(3, 3, 3, seed=seed)
            rng = np.random.default_rng(seed + 50)
            Q = random_feasible_covariances(3, 3, 10.0, rng)
            analytic = weighted_gradients(inst, Q)
            numeric = finite_difference_gradients(inst, Q)
            for b in range(3):
                rel = np.linalg.norm(numeric[b] - analytic[b]) / np.linalg.norm(analytic[b])
                assert rel <= 1e-5


class TestDeflect:
    def test_zero_previous_direction(self):
        rng = np.random.default_rng(0)
        g = rng.standard_normal((2, 2, 2)) + 0j
        out = deflect(g, g, np.zeros_like(g))
        assert np.array_equal(out, g)

    def test_equal_norms_give_unit_ratio(self):
        rng = np.random.default_rng(1)
        g = rng.standard_normal((2, 2, 2)) + 0j
        prev_dir = rng.standard_normal((2, 2, 2)) + 0j
        out = deflect(g, g, prev_dir)
        assert np.allclose(out, g + prev_dir)

    def test_ratio_recomputed_independently(self):
        rng = np.random.default_rng(2)
        g = rng.standard_normal((3, 2, 2)) + 1j * rng.standard_normal((3, 2, 2))
        prev_g = rng.standard_normal((3, 2, 2)) + 1j * rng.standard_normal((3, 2, 2))
        prev_dir = rng.standard_normal((3, 2, 2)) + 1j * rng.standard_normal((3, 2, 2))
        out = deflect(g, prev_g, prev_dir)
        for b in range(3):
            rho = np.sum(np.abs(g[b]) ** 2) / np.sum(np.abs(prev_g[b]) ** 2)
            assert np.allclose(out[b] - g[b], rho * prev_dir[b], atol=1e-12)

    def test_zero_previous_gradient_restarts(self):
        rng = np.random.default_rng(3)
        g = rng.standard_normal((2, 2, 2)) + 0j
        prev_dir = rng.standard_normal((2, 2, 2)) + 0j
        out = deflect(g, np.zeros_like(g), prev_dir)
        assert np.array_equal(out, g)


class TestArmijoStep:
    def test_zero_direction(self):
        inst = make_instance(2, 2, 2, seed=5)
        Q = default_start(inst)
        grad = weighted_gradients(inst, Q)
        result = armijo_step(inst, Q, grad, Q, OptimizerConfig())
        assert result.m == 0
        assert result.alpha == 1.0
        assert np.array_equal(result.accepted, Q)

    def test_full_step_accepted_when_improvement_suffices(self):
        # a short direction keeps the objective first-order, so the m = 0
        # trial already meets the sufficient-increase test at sigma = 0.1
        inst = make_instance(3, 2, 2, seed=6)
        Q = default_start(inst)
        grad = weighted_gradients(inst, Q)
        projected = project_sum_power(Q + grad, inst.power).projected
        target = Q + 0.01 * (projected - Q)
        result = armijo_step(inst, Q, grad, target, OptimizerConfig())
        assert result.m == 0
        assert result.alpha == 1.0

    def test_returned_m_is_minimal(self):
        inst = make_instance(3, 2, 2, seed=7)
        rng = np.random.default_rng(8)
        config = OptimizerConfig()
        for _ in range(5):
            Q = random_feasible_covariances(3, 2, inst.power, rng)
            grad = weighted_gradients(inst, Q)
            target = project_sum_power(Q + grad, inst.power).projected
            result = armijo_step(inst, Q, grad, target, config)
            f0 = evaluate_objective(inst, Q)
            slope = config.sigma * float(
                np.real(np.sum(np.conj(grad) * (target - Q)))
            )
            for m in range(result.m):
                alpha = config.beta**m
                f_trial = evaluate_objective(inst, Q + alpha * (target - Q))
                assert f_trial - f0 < alpha * slope

    def test_stall_raises(self):
        # sigma > 1/2 cannot be met under the doubled-gradient convention,
        # so backtracking runs out of trials at any non-stationary point
        inst = make_instance(2, 2, 2, seed=9)
        Q = default_start(inst)
        grad = weighted_gradients(inst, Q)
        target = project_sum_power(Q + grad, inst.power).projected
        config = OptimizerConfig(sigma=0.9, max_armijo_trials=10)
        with pytest.raises(LineSearchStalled):
            armijo_step(inst, Q, grad, target, config)


class TestCgpSolve:
    def test_single_user_matches_waterfilling(self):
        for seed in range(3):
            inst = make_instance(1, 4, 4, seed=seed, weights=[1.0])
            result = cgp_solve(inst)
            oracle = waterfilling_capacity(inst.channels.channels[0], inst.power)
            assert result.status == STATUS_CONVERGED
            assert abs(result.final_objective - oracle) <= 1e-6 * oracle

    def test_zero_weights_terminate_immediately(self):
        inst = make_instance(3, 2, 2, seed=10, weights=[0.0, 0.0, 0.0])
        result = cgp_solve(inst)
        assert result.status == STATUS_CONVERGED
        assert result.final_objective == 0.0
        assert result.n_iterations == 1

    def test_monotone_ascent_and_feasible_result(self):
        inst = make_instance(5, 3, 2, seed=11)
        result = cgp_solve(inst)
        objectives = [rec.objective for rec in result.trace]
        assert all(b >= a - 1e-12 for a, b in zip(objectives, objectives[1:]))
        assert feasibility_check(result.covariances, inst.power).feasible
        assert result.status == STATUS_CONVERGED

    def test_every_iterate_feasible(self):
        # determinism makes the max_iters-truncated solve reproduce iterate k
        inst = make_instance(3, 2, 2, seed=12)
        for k in range(1, 8):
            config = OptimizerConfig(max_iters=k)
            partial = cgp_solve(inst, config)
            assert feasibility_check(partial.covariances, inst.power).feasible

    def test_stationarity_at_convergence(self):
        inst = make_instance(3, 2, 2, seed=13)
        result = cgp_solve(inst)
        grad = weighted_gradients(inst, result.covariances)
        f_star = result.final_objective
        rng = np.random.default_rng(14)
        for _ in range(100):
            V = random_feasible_covariances(3, 2, inst.power, rng)
            growth = float(np.real(np.sum(np.conj(grad) * (V - result.covariances))))
            assert growth <= 1e-4 * (1 + abs(f_star))

    def test_multi_start_value_agreement(self):
        inst = make_instance(4, 3, 3, seed=15)
        rng = np.random.default_rng(16)
        finals = [cgp_solve(inst).final_objective]
        for _ in range(3):
            Q0 = random_feasible_covariances(4, 3, inst.power, rng)
            finals.append(cgp_solve(inst, Q0=Q0).final_objective)
        ref = finals[0]
        assert all(abs(f - ref) <= 1e-5 * abs(ref) for f in finals)

    def test_gp_matches_cgp(self):
        inst = make_instance(4, 2, 2, seed=17)
        f_cgp = cgp_solve(inst).final_objective
        f_gp = gp_solve(inst).final_objective
        assert abs(f_cgp - f_gp) <= 1e-4 * abs(f_cgp)

    def test_deterministic_traces(self):
        inst = make_instance(4, 3, 2, seed=18)
        a = cgp_solve(inst)
        b = cgp_solve(inst)
        assert len(a.trace) == len(b.trace)
        for ra, rb in zip(a.trace, b.trace):
            assert ra.iter == rb.iter
            assert ra.objective == rb.objective
            assert ra.grad_norm == rb.grad_norm
            assert ra.armijo_m == rb.armijo_m
            assert ra.water_level == rb.water_level
            assert ra.max_delta == rb.max_delta
        assert np.array_equal(a.covariances, b.covariances)

    def test_stalled_status_returns_best_iterate(self):
        inst = make_instance(3, 2, 2, seed=19)
        config = OptimizerConfig(sigma=0.9, max_armijo_trials=5)
        result = cgp_solve(inst, config)
        assert result.status == STATUS_STALLED
        assert feasibility_check(result.covariances, inst.power).feasible

    def test_ten_user_setup_converges(self):
        weights = [1, 1.5, 0.8, 0.9, 1.4, 1.2, 0.7, 1.1, 1.03, 1.3]
        inst = make_instance(10, 4, 4, seed=20, weights=weights)
        result = cgp_solve(inst)
        assert result.status == STATUS_CONVERGED
        assert result.n_iterations <= 200


class TestConfigValidation:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"beta": 0.0},
            {"beta": 1.0},
            {"sigma": 1.0},
            {"epsilon": 0.0},
            {"max_iters": 0},
            {"reset_period": 0},
        ],
    )
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ValueError):
            OptimizerConfig(**kwargs)


class TestWaterfillingOracle:
    def test_two_mode_grid_search(self):
        rng = np.random.default_rng(21)
        for _ in range(5):
            H = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            P = float(rng.uniform(0.5, 10.0))
            gains = np.linalg.eigvalsh(H @ H.conj().T)
            best = 0.0
            for p in np.linspace(0, P, 20001):
                best = max(best, np.log1p(p * gains[0]) + np.log1p((P - p) * gains[1]))
            assert abs(waterfilling_capacity(H, P) - best) <= 1e-6 * best
