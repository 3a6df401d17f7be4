import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmcrates.constants import b_limit, b_seq, c_limit, c_seq
from cmcrates.errors import BudgetExceededError, DomainError

THETAS = [-0.9, -0.8, -0.7, -0.6, -0.5, -0.4, -0.3, -0.2, -0.1]
DELTAS = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]


def em_b_limit(theta, N=200):
    """B_theta by Euler-Maclaurin at a cut N, in 40-digit arithmetic.

    sum_{j>=N} j^theta "=" -N^(theta+1)/(theta+1) + N^theta/2 - theta N^(theta-1)/12 + ...
    so B_theta = sum_{j<N} j^theta - N^(theta+1)/(theta+1) + N^theta/2 - theta N^(theta-1)/12
                 + theta (theta-1) (theta-2) N^(theta-3)/720 - ...
    """
    with mpmath.workdps(40):
        t = mpmath.mpf(theta)
        n = mpmath.mpf(N)
        head = mpmath.fsum(mpmath.mpf(j) ** t for j in range(1, N))
        f = lambda x: x**t
        corr = n ** (t + 1) / (t + 1)
        em = f(n) / 2 - mpmath.diff(f, n, 1) / 12 + mpmath.diff(f, n, 3) / 720 - mpmath.diff(f, n, 5) / 30240
        return float(head - corr + em)


def em_c_limit(delta, N=400):
    """C_delta by Euler-Maclaurin at a cut N (the antiderivative of the terms is (log x)^delta / delta)."""
    with mpmath.workdps(40):
        d = mpmath.mpf(delta)
        f = lambda x: mpmath.log(x) ** (d - 1) / x
        head = mpmath.fsum(f(mpmath.mpf(j)) for j in range(2, N))
        n = mpmath.mpf(N)
        em = f(n) / 2 - mpmath.diff(f, n, 1) / 12 + mpmath.diff(f, n, 3) / 720 - mpmath.diff(f, n, 5) / 30240
        return float(head - mpmath.log(n) ** d / d + em)


class TestOracles:
    """The oracles agree with the classical closed forms before they are used."""

    def test_em_b_is_zeta(self):
        assert em_b_limit(-0.5) == pytest.approx(float(mpmath.zeta(0.5)), abs=1e-12)
        assert em_b_limit(-0.25) == pytest.approx(float(mpmath.zeta(0.25)), abs=1e-12)

    def test_em_c_is_euler_gamma(self):
        assert em_c_limit(1.0) == pytest.approx(float(mpmath.euler) - 1.0, abs=1e-12)


class TestBSeq:
    def test_first_term(self):
        assert b_seq(1, -0.5) == -1.0

    @given(n=st.integers(2, 5000), theta=st.floats(-0.99, -0.01))
    @settings(max_examples=60, deadline=None)
    def test_telescoping(self, n, theta):
        diff = b_seq(n, theta) - b_seq(n - 1, theta)
        expected = n**theta - (n ** (theta + 1) - (n - 1) ** (theta + 1)) / (theta + 1)
        assert diff == pytest.approx(expected, abs=1e-10)

    def test_brute_force_million(self):
        assert b_seq(10**6, -0.5) == pytest.approx(-1.46035, abs=5e-4)

    @pytest.mark.parametrize("theta", [-0.9, -0.5, -0.1])
    def test_strictly_decreasing(self, theta):
        vals = [b_seq(n, theta) for n in range(1, 200)]
        assert np.all(np.diff(vals) < 0)

    @pytest.mark.parametrize("theta", [0.0, -1.0, 0.5, math.nan])
    def test_domain(self, theta):
        with pytest.raises(DomainError):
            b_seq(10, theta)

    def test_n_domain(self):
        with pytest.raises(DomainError):
            b_seq(0, -0.5)


class TestBLimit:
    def test_zeta_half(self):
        est = b_limit(-0.5, tol=1e-8)
        assert est.error_bound <= 1e-8
        assert est.value == pytest.approx(-1.4603545, abs=1e-6)
        assert est.value == pytest.approx(float(mpmath.zeta(0.5)), abs=1e-8)
        assert est.method == "rate_extrapolated"
        assert est.n_used >= 2

    @pytest.mark.parametrize("theta", THETAS)
    def test_bracket_and_oracle(self, theta):
        est = b_limit(theta)
        assert -1 / (theta + 1) <= est.value < theta / (theta + 1) < 0
        assert abs(est.value - em_b_limit(theta)) <= max(est.error_bound, 1e-10) * 10

    @pytest.mark.parametrize("theta", [-0.9, -0.5, -0.3, -0.1])
    def test_error_bound_tightens_with_tol(self, theta):
        loose = b_limit(theta, tol=1e-3)
        tight = b_limit(theta, tol=1e-6)
        assert tight.error_bound <= 1e-6
        assert tight.error_bound <= loose.error_bound

    def test_error_bound_strictly_tighter(self):
        assert b_limit(-0.1, tol=1e-6).error_bound < b_limit(-0.1, tol=1e-3).error_bound

    def test_unreachable_tolerance(self):
        with pytest.raises(BudgetExceededError) as info:
            b_limit(-0.5, tol=1e-300)
        assert info.value.best is not None
        assert info.value.best.value == pytest.approx(float(mpmath.zeta(0.5)), abs=1e-8)


class TestCSeq:
    def test_first_term(self):
        assert c_seq(2, 1.0) == pytest.approx(0.5 - math.log(2), abs=1e-15)

    @given(n=st.integers(2, 3000), delta=st.floats(0.01, 1.0))
    @settings(max_examples=60, deadline=None)
    def test_decreasing(self, n, delta):
        assert c_seq(n + 1, delta) < c_seq(n, delta)

    def test_brute_force_million(self):
        assert c_seq(10**6, 1.0) == pytest.approx(-0.42278, abs=1e-5)

    @given(n=st.integers(2, 3000), delta=st.floats(0.01, 1.0))
    @settings(max_examples=60, deadline=None)
    def test_sandwich(self, n, delta):
        value = c_seq(n, delta)
        lower = math.log(n) ** (delta - 1) / n - math.log(2) ** delta / delta
        assert lower - 1e-12 <= value <= 1e-12

    @given(n=st.integers(2, 1000), gap=st.integers(1, 1000), delta=st.floats(0.01, 1.0))
    @settings(max_examples=60, deadline=None)
    def test_cauchy_bound(self, n, gap, delta):
        m = n + gap
        diff = c_seq(m, delta) - c_seq(n, delta)
        envelope = math.log(m) ** (delta - 1) / m - math.log(n) ** (delta - 1) / n
        assert 0 > diff > envelope - 1e-12

    @pytest.mark.parametrize("delta", [0.0, 1.5, -0.2])
    def test_domain(self, delta):
        with pytest.raises(DomainError):
            c_seq(10, delta)


class TestCLimit:
    def test_euler_gamma(self):
        est = c_limit(1.0, tol=1e-8)
        assert est.value == pytest.approx(-0.4227843, abs=1e-6)
        assert est.value == pytest.approx(float(mpmath.euler) - 1, abs=1e-8)

    @pytest.mark.parametrize("delta", DELTAS)
    def test_bracket_and_oracle(self, delta):
        est = c_limit(delta)
        assert -(math.log(2) ** delta) / delta <= est.value <= 0
        assert abs(est.value - em_c_limit(delta)) <= max(est.error_bound, 1e-10) * 10

    def test_half(self):
        est = c_limit(0.5)
        assert -2 * math.sqrt(math.log(2)) <= est.value <= 0

    @pytest.mark.parametrize("delta", [0.3, 0.5, 1.0])
    def test_rate_envelope(self, delta):
        # C_{n,delta} - C_delta = O((log n)^(delta-1) / n): the scaled gap settles to a constant.
        limit = em_c_limit(delta)
        ns = [1000, 2000, 4000, 8000]
        k = [(c_seq(n, delta) - limit) / (math.log(n) ** (delta - 1) / n) for n in ns]
        assert max(k) - min(k) <= 0.05 * max(abs(v) for v in k)
        for n in ns:
            assert abs(c_seq(2 * n, delta) - c_seq(n, delta)) <= 1.05 * abs(k[0]) * math.log(n) ** (delta - 1) / n
