"""Recycling constants and combined-estimate tests."""

import numpy as np
import pytest

from smc_optl import (
    LKernelStrategy,
    RecyclingState,
    builtin_config,
    recycled_estimate,
    recycling_objective,
    run,
    update_recycling,
)


def push(state, ess_target, mean, cov):
    """Append an iteration whose weights have the requested ESS."""
    n = 1000
    # two-level weights tuned so (sum w)^2 / sum w^2 == ess_target
    # using k heavy weights of 1 and rest 0 gives ess == k
    log_w = np.full(n, -np.inf)
    log_w[: int(ess_target)] = 0.0
    return update_recycling(state, log_w, np.atleast_1d(mean), np.atleast_2d(cov))


class TestConstants:
    def test_single_iteration(self):
        state = push(RecyclingState(), 50, 1.7, 0.5)
        np.testing.assert_allclose(state.constants, [1.0])
        mean, cov = recycled_estimate(state)
        assert mean[0] == pytest.approx(1.7)
        assert cov[0, 0] == pytest.approx(0.5)

    def test_two_equal_iterations_average(self):
        state = RecyclingState()
        push(state, 100, 0.0, 1.0)
        push(state, 100, 4.0, 1.0)
        np.testing.assert_allclose(state.constants, [0.5, 0.5])
        mean, _ = recycled_estimate(state)
        assert mean[0] == pytest.approx(2.0)

    def test_hand_computed_quarters(self):
        state = RecyclingState()
        push(state, 100, 0.0, 1.0)
        push(state, 300, 4.0, 1.0)
        np.testing.assert_allclose(state.constants, [0.25, 0.75])
        mean, _ = recycled_estimate(state)
        assert mean[0] == pytest.approx(3.0)

    def test_constants_always_a_probability_vector(self):
        rng = np.random.default_rng(3)
        state = RecyclingState()
        for _ in range(30):
            push(state, rng.integers(1, 900), rng.standard_normal(), 1.0)
            c = state.constants
            assert abs(c.sum() - 1.0) <= 1e-12
            assert np.all((c >= 0.0) & (c <= 1.0))

    def test_append_never_rewrites_history(self):
        state = RecyclingState()
        push(state, 10, 0.0, 1.0)
        push(state, 20, 1.0, 1.0)
        before = list(state.l_values)
        push(state, 400, 2.0, 1.0)
        assert state.l_values[:2] == before


class TestRecycledEstimate:
    def test_convexity_fixed_point(self):
        state = RecyclingState()
        for l in (10, 250, 37):
            push(state, l, 2.5, 0.4)
        mean, cov = recycled_estimate(state)
        assert mean[0] == pytest.approx(2.5)
        assert cov[0, 0] == pytest.approx(0.4)

    def test_empty_state_rejected(self):
        with pytest.raises(ValueError):
            recycled_estimate(RecyclingState())

    def test_matches_direct_recomputation(self):
        # running sums must agree with the definition applied from scratch
        rng = np.random.default_rng(9)
        state = RecyclingState()
        for _ in range(15):
            mean = rng.standard_normal(2)
            a = rng.standard_normal((2, 2))
            push(state, rng.integers(2, 500), mean, a @ a.T + np.eye(2))
        c = state.constants
        mean_direct = sum(ck * m for ck, m in zip(c, state.means))
        second_direct = sum(
            ck * (v + np.outer(m, m))
            for ck, m, v in zip(c, state.means, state.covs)
        )
        mean, cov = recycled_estimate(state)
        np.testing.assert_allclose(mean, mean_direct, rtol=1e-12)
        np.testing.assert_allclose(
            cov, second_direct - np.outer(mean_direct, mean_direct), rtol=1e-10
        )


class TestOptimality:
    def test_constants_beat_random_simplex_points(self):
        config = builtin_config("2d_toy").replace(
            n_particles=100,
            n_iterations=25,
            strategy=LKernelStrategy.gaussian_opt(),
        )
        rng = np.random.default_rng(0)
        for seed in range(3):
            record = run(config.replace(seed=seed))
            l = record.l_values
            best = recycling_objective(l, record.recycling_constants)
            for _ in range(100):
                candidate = rng.dirichlet(np.ones(len(l)))
                assert best >= recycling_objective(l, candidate) - 1e-9

    def test_objective_value_at_optimum(self):
        # at c = l / sum(l) the objective collapses to sum(l)
        l = np.array([10.0, 40.0, 25.0])
        c = l / l.sum()
        assert recycling_objective(l, c) == pytest.approx(l.sum(), rel=1e-12)


class TestConvergenceBehavior:
    def test_recycled_trace_is_smoother_and_converges(self):
        # the combined estimate should end near the truth and fluctuate
        # less across iterations than the raw per-iteration estimates
        config = builtin_config("2d_toy").replace(
            strategy=LKernelStrategy.gaussian_opt()
        )
        record = run(config)
        assert np.all(np.abs(record.final_recycled_mean - [3.0, 2.0]) < 0.15)
        tail_raw = record.mean_estimate[50:]
        tail_rec = record.recycled_mean[50:]
        assert tail_rec.std(axis=0).sum() < tail_raw.std(axis=0).sum()
