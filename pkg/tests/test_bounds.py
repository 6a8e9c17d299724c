from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.stats import norm

from linbreak.bounds import (BoundError, DegenerateVarianceError, KlPair, integrate,
                             kl_gaussian_regression, kl_gaussian_stochastic, kl_gaussian_trend,
                             lower_bound, theorem1_exponent, theorem2_exponent)
from linbreak.model import DeterministicPlan

ZERO = KlPair(lambda t: np.zeros_like(t), lambda t: np.zeros_like(t))


def const(c):
    return lambda t: np.full_like(np.asarray(t, dtype=float), c)


def numeric_kl(m0, s0, m1, s1):
    """KL(N(m0, s0^2) || N(m1, s1^2)) by quadrature of the log density ratio."""
    f = lambda x: norm.pdf(x, m0, s0) * (norm.logpdf(x, m0, s0) - norm.logpdf(x, m1, s1))
    val, _ = quad(f, m0 - 40 * s0, m0 + 40 * s0, epsabs=1e-13, epsrel=1e-12, limit=400)
    return val


class TestTheorem1:
    def test_no_information(self):
        assert theorem1_exponent(ZERO, 0.3, 0.05) == 0.0

    def test_constant(self):
        assert theorem1_exponent(KlPair(const(2.0), const(2.0)), 0.4, 0.1) == pytest.approx(0.2)

    def test_takes_smaller_side(self):
        kl = KlPair(const(1.0), const(3.0))
        assert theorem1_exponent(kl, 0.5, 0.1) == pytest.approx(0.1)

    def test_nondecreasing_in_eps(self):
        kl = kl_gaussian_trend(lambda t: np.sin(5 * t), lambda t: t)
        vals = [theorem1_exponent(kl, 0.5, e) for e in (0.05, 0.1, 0.2, 0.3, 0.45)]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_eps_range(self):
        with pytest.raises(BoundError):
            theorem1_exponent(ZERO, 0.3, 0.3)

    def test_grid_functions(self):
        kl = KlPair(np.full(101, 0.5), np.linspace(0, 1, 101))
        assert theorem1_exponent(kl, 0.5, 0.1) == pytest.approx(min(0.05, 0.045))

    def test_integrate_simpson_exact_on_cubics(self):
        assert integrate(lambda t: t**3, 0.0, 2.0) == pytest.approx(4.0, rel=1e-12)

    def test_lower_bound(self):
        assert lower_bound(0.004, 1000) == pytest.approx(np.exp(-4))


class TestTheorem2:
    def test_single_change_reduces(self):
        kl = KlPair(const(1.0), const(2.0))
        assert theorem2_exponent([kl], [0.3], 0.05) == theorem1_exponent(kl, 0.3, 0.05)

    def test_identical_changes(self):
        kl = KlPair(const(1.0), const(1.0))
        assert theorem2_exponent([kl, kl], [0.3, 0.7], 0.05) == pytest.approx(0.05)

    def test_weak_change_dominates(self):
        kls = [KlPair(const(1.0), const(1.0)), KlPair(const(0.01), const(0.01))]
        assert theorem2_exponent(kls, [0.3, 0.7], 0.05) == pytest.approx(0.0005)

    def test_separation(self):
        kl = KlPair(const(1.0), const(1.0))
        with pytest.raises(BoundError):
            theorem2_exponent([kl, kl], [0.3, 0.35], 0.1)
        with pytest.raises(BoundError):
            theorem2_exponent([kl], [0.3, 0.7], 0.05)


class TestTrendAndRegression:
    def test_trend_equal(self):
        kl = kl_gaussian_trend(np.sin, np.sin)
        assert np.all(kl.J0(np.linspace(0, 1, 5)) == 0)

    def test_trend_unit_gap(self):
        kl = kl_gaussian_trend(lambda t: t + 1, lambda t: t)
        np.testing.assert_allclose(kl.J0(np.linspace(0, 1, 5)), 0.5)

    def test_trend_symmetric(self):
        a, b = (lambda t: t**2), np.cos
        t = np.linspace(0, 1, 7)
        k1, k2 = kl_gaussian_trend(a, b), kl_gaussian_trend(b, a)
        np.testing.assert_allclose(k1.J0(t), k2.J0(t))
        np.testing.assert_allclose(k1.J1(t), k2.J1(t))

    def test_regression_equal(self):
        plan = DeterministicPlan(("1 + 0*t", "t"))
        kl = kl_gaussian_regression(plan, [1.0, 2.0], [1.0, 2.0], 1.0)
        assert np.all(kl.J0(np.linspace(0, 1, 4)) == 0)

    def test_regression_unit(self):
        kl = kl_gaussian_regression(DeterministicPlan(("1 + 0*t",)), [1.0], [0.0], 1.0)
        np.testing.assert_allclose(kl.J0(np.linspace(0, 1, 4)), 0.5)

    def test_regression_sigma_scaling(self):
        plan = DeterministicPlan(("1 + 0*t", "sin(t)"))
        t = np.linspace(0, 1, 9)
        k1 = kl_gaussian_regression(plan, [0.0, 1.0], [0.3, 0.5], 1.0)
        k2 = kl_gaussian_regression(plan, [0.0, 1.0], [0.3, 0.5], 2.0)
        np.testing.assert_allclose(k2.J0(t), k1.J0(t) / 4)

    def test_regression_bad_sigma(self):
        with pytest.raises(BoundError):
            kl_gaussian_regression(DeterministicPlan(("1",)), [1.0], [0.0], 0.0)

    def test_intercept_shift_exponent(self):
        plan = DeterministicPlan(("1 + 0*t", "2.2 + sin(20*pi*t)"))
        kl = kl_gaussian_regression(plan, [0.0, 1.0], [0.4, 1.0], 1.0)
        assert theorem1_exponent(kl, 0.3, 0.05) == pytest.approx(0.004)


class TestStochastic:
    def test_equal_regimes(self):
        kl = kl_gaussian_stochastic([const(1.0), const(2.0)], [const(1.0), const(0.5)],
                                    [1.0, 2.0], [1.0, 2.0])
        t = np.linspace(0, 1, 5)
        np.testing.assert_allclose(kl.J0(t), 0, atol=1e-15)
        np.testing.assert_allclose(kl.J1(t), 0, atol=1e-15)

    def test_equal_variances_reduce_to_mean_shift(self):
        # a = (1, 1), b = (1, -1): equal variances, means differ by 2 f2
        f = [const(0.5), lambda t: 1 + t]
        s = [const(1.0), const(1.0)]
        kl = kl_gaussian_stochastic(f, s, [1.0, 1.0], [1.0, -1.0])
        t = np.linspace(0, 1, 6)
        delta2 = 2.0  # Delta^2 = 1 + 1
        np.testing.assert_allclose(kl.J0(t), (2 * (1 + t)) ** 2 / (2 * delta2), rtol=1e-12)
        for ti in (0.0, 0.4, 1.0):
            m0, m1 = 0.5 + (1 + ti), 0.5 - (1 + ti)
            assert kl.J0(np.array([ti]))[0] == pytest.approx(
                numeric_kl(m0, np.sqrt(2), m1, np.sqrt(2)), abs=1e-6)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(-2, 2), min_size=2, max_size=2),
           st.lists(st.floats(0.2, 2), min_size=2, max_size=2),
           st.lists(st.floats(-2, 2).filter(lambda v: abs(v) > 0.1), min_size=2, max_size=2),
           st.lists(st.floats(-2, 2).filter(lambda v: abs(v) > 0.1), min_size=2, max_size=2),
           st.floats(0, 1))
    def test_numeric_kl_oracle(self, f, s, a, b, t):
        kl = kl_gaussian_stochastic([const(v) for v in f], [const(v) for v in s], a, b)
        m0, m1 = float(np.dot(a, f)), float(np.dot(b, f))
        d0 = float(np.sqrt(np.dot(np.square(a), np.square(s))))
        d1 = float(np.sqrt(np.dot(np.square(b), np.square(s))))
        tt = np.array([t])
        j0, j1 = kl.J0(tt)[0], kl.J1(tt)[0]
        assert j0 >= -1e-12 and j1 >= -1e-12
        assert j0 == pytest.approx(numeric_kl(m0, d0, m1, d1), abs=1e-6)
        assert j1 == pytest.approx(numeric_kl(m1, d1, m0, d0), abs=1e-6)

    def test_degenerate_variance(self):
        kl = kl_gaussian_stochastic([const(1.0)], [const(0.0)], [1.0], [2.0])
        with pytest.raises(DegenerateVarianceError):
            kl.J0(np.array([0.5]))

    def test_length_mismatch(self):
        with pytest.raises(BoundError):
            kl_gaussian_stochastic([const(1.0)], [const(1.0)], [1.0, 2.0], [1.0, 2.0])
