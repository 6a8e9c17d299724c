from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import constant_step_spec
from linbreak.cpstat import (BadRangeError, EmptyWindowError, cross_moment, limit_mean_deterministic,
                             limit_mean_stochastic, norm_path, partial_gram, profile, profile_max,
                             search_window, z_statistic)
from linbreak.matlin import frobenius_norm
from linbreak.model import DeterministicPlan, simulate, simulate_batch
from linbreak.scenarios import ar1_spec, eq16_spec, ses_spec


def brute_force_norms(X, Y):
    """O(N^2) evaluation straight from the definition, with numpy's solver."""
    N = X.shape[1]
    full_g = X @ X.T
    full_c = X @ Y.T
    out = []
    for n in range(1, N + 1):
        g = X[:, :n] @ X[:, :n].T
        c = X[:, :n] @ Y[:, :n].T
        out.append(np.linalg.norm(c - g @ np.linalg.solve(full_g, full_c)) / N)
    return np.array(out)


class TestMoments:
    def test_counting(self):
        assert partial_gram(np.ones((1, 10)), 1, 10).tolist() == [[10.0]]

    def test_orthonormal_columns(self):
        np.testing.assert_array_equal(partial_gram(np.eye(2), 1, 2), np.eye(2))

    def test_identity_grid(self):
        X = np.array([[0.25, 0.5, 0.75, 1.0]])
        assert partial_gram(X, 1, 4)[0, 0] == pytest.approx(1.875)

    def test_cross_zero(self):
        np.testing.assert_array_equal(cross_moment(np.ones((2, 5)), np.zeros((3, 5)), 1, 5), 0)

    def test_plain_sum(self):
        assert cross_moment(np.ones((1, 3)), [[1.0, 2.0, 3.0]], 1, 3)[0, 0] == 6.0

    def test_substitution_identity(self, rng):
        X = rng.standard_normal((3, 20))
        c = rng.standard_normal((2, 3))
        np.testing.assert_allclose(cross_moment(X, c @ X, 4, 17), partial_gram(X, 4, 17) @ c.T)

    @pytest.mark.parametrize("n1,n2", [(0, 3), (3, 2), (1, 6)])
    def test_bad_range(self, n1, n2):
        with pytest.raises(BadRangeError):
            partial_gram(np.ones((1, 5)), n1, n2)


class TestZStatistic:
    def test_vanishes_at_N(self, rng):
        X, Y = rng.standard_normal((3, 15)), rng.standard_normal((2, 15))
        assert np.all(z_statistic(X, Y, 15) == 0.0)
        assert norm_path(X, Y)[-1] == 0.0

    def test_step_example(self):
        s = simulate(constant_step_spec(100), 0)
        np.testing.assert_allclose(z_statistic(s.X, s.Y, 50), [[-0.25]], atol=1e-15)

    def test_stationary_noise_free_is_zero(self):
        s = simulate(eq16_spec(60, noise_std=0.0), 0)
        assert max(frobenius_norm(z_statistic(s.X, s.Y, n)) for n in range(1, 61)) < 1e-13
        assert np.all(norm_path(s.X, s.Y) == 0.0)

    def test_path_matches_literal(self, rng):
        X, Y = rng.standard_normal((3, 25)), rng.standard_normal((2, 25))
        lit = [frobenius_norm(z_statistic(X, Y, n)) for n in range(1, 26)]
        np.testing.assert_allclose(norm_path(X, Y), lit, atol=1e-13)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(8, 64), st.integers(1, 3), st.integers(1, 3), st.integers(0, 2**31))
    def test_path_matches_brute_force(self, N, K, M, seed):
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((K, N)) + 2.0
        Y = rng.standard_normal((M, N))
        np.testing.assert_allclose(norm_path(X, Y), brute_force_norms(X, Y), rtol=1e-9, atol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(10, 60), st.integers(0, 2**31))
    def test_residual_invariance(self, N, seed):
        # adding any exact linear term c X to Y leaves Z unchanged
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((3, N))
        Y = rng.standard_normal((2, N))
        c = rng.uniform(-5, 5, (2, 3))
        for n in (1, N // 2, N - 1):
            np.testing.assert_allclose(z_statistic(X, Y + c @ X, n), z_statistic(X, Y, n), atol=1e-10)

    def test_small_at_first_index(self, rng):
        s = simulate(eq16_spec(400), 3)
        path = norm_path(s.X, s.Y)
        assert path[0] < path.max() / 5

    def test_batched_matches_single(self):
        X, Y = simulate_batch(ses_spec(80), 2, 3)
        batch = norm_path(X, Y)
        for j in range(3):
            np.testing.assert_allclose(batch[j], norm_path(X[j], Y[j]), rtol=1e-10)


class TestProfile:
    def test_window(self):
        assert search_window(1000, 0.05, 0.95) == (50, 950)
        assert search_window(10, 0.0, 1.0) == (1, 10)

    def test_window_errors(self):
        with pytest.raises(ValueError):
            search_window(100, 0.6, 0.5)
        with pytest.raises(EmptyWindowError):
            search_window(5, 0.01, 0.1)

    def test_zero_profile_ties_to_left(self):
        s = simulate(eq16_spec(100, noise_std=0.0), 0)
        p = profile(s.X, s.Y)
        assert p.max_value == 0.0 and p.argmax_index == p.window_lo == 5

    def test_step_argmax(self):
        s = simulate(constant_step_spec(100), 0)
        p = profile(s.X, s.Y, 0.1, 0.9)
        assert p.argmax_index == 50
        assert p.max_value == pytest.approx(0.25)
        assert p.theta_hat == 0.5
        assert len(p.values) == p.window_hi - p.window_lo + 1

    def test_batched_max_matches_profile(self):
        X, Y = simulate_batch(eq16_spec(200, 0.4), 4, 5)
        vals, where = profile_max(X, Y)
        for j in range(5):
            p = profile(X[j], Y[j])
            assert where[j] == p.argmax_index
            assert vals[j] == pytest.approx(p.max_value, rel=1e-10)


class TestLimitMean:
    def test_no_change(self):
        plan = DeterministicPlan(("1 + 0*t", "t"))
        assert np.all(limit_mean_deterministic(plan, [[1.0, 2.0]], [[1.0, 2.0]], 0.4, 0.3) == 0)

    def test_constant_plan(self):
        plan = DeterministicPlan(("1 + 0*t",))
        np.testing.assert_allclose(limit_mean_deterministic(plan, [[1.0]], [[2.0]], 0.5, 0.5), [[-0.25]])

    def test_vanishes_at_one(self):
        plan = DeterministicPlan(("1 + 0*t", "2 + sin(2*pi*t)"))
        np.testing.assert_allclose(limit_mean_deterministic(plan, [[0, 1]], [[1, 1]], 0.3, 1.0), 0,
                                   atol=1e-12)

    def test_tent_shape(self):
        plan = DeterministicPlan(("1 + 0*t",))
        for t in (0.1, 0.3, 0.6, 0.9):
            m = limit_mean_deterministic(plan, [[0.0]], [[1.0]], 0.3, t)[0, 0]
            expected = -(t * 0.7 if t <= 0.3 else 0.3 * (1 - t))
            assert m == pytest.approx(expected, abs=1e-12)

    def test_stochastic_reduces_to_deterministic(self):
        plan = DeterministicPlan(("1 + 0*t", "1 + 0*t"))
        V = lambda s: np.broadcast_to(np.eye(2)[:, :, None], (2, 2, s.size))
        ident = DeterministicPlan(("1 + 0*t",))
        a, b = [[0.0, 1.0]], [[0.5, 2.0]]
        for t in (0.2, 0.5, 0.8):
            m = limit_mean_stochastic(V, a, b, 0.4, t)
            col = [limit_mean_deterministic(ident, [[a[0][k]]], [[b[0][k]]], 0.4, t)[0, 0]
                   for k in range(2)]
            np.testing.assert_allclose(m[:, 0], col, atol=1e-12)
        assert np.all(limit_mean_stochastic(V, a, a, 0.4, 0.3) == 0)

    def test_matches_large_sample_profile(self):
        plan_spec = eq16_spec(4000, delta=0.5, noise_std=0.0)
        s = simulate(plan_spec, 0)
        n = 1000
        z = z_statistic(s.X, s.Y, n)
        m = limit_mean_deterministic(plan_spec.plan, [[0.0, 1.0]], [[0.5, 1.0]], 0.3, n / 4000)
        np.testing.assert_allclose(z[:, 0], m[:, 0], rtol=2e-3)

    def test_stochastic_against_simulation(self):
        # AR(1) with unit innovations: E x^2 = 1/(1 - rho^2), E x = 0
        rho = 0.3
        V = lambda s: np.broadcast_to(np.diag([1.0, 1 / (1 - rho**2)])[:, :, None], (2, 2, s.size))
        m = limit_mean_stochastic(V, [[0.0, 1.0]], [[0.0, 1.3]], 0.5, 0.5)
        X, Y = simulate_batch(ar1_spec(2000, 0.5, noise_std=0.0), 0, 20)
        z = np.mean([z_statistic(X[j], Y[j], 1000)[:, 0] for j in range(20)], axis=0)
        np.testing.assert_allclose(z, m[:, 0], atol=0.01)
