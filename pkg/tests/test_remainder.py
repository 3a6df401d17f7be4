import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from cmcrates.distributions import exact_sn_distribution, get_distribution
from cmcrates.errors import DomainError
from cmcrates.montecarlo import MCConfig
from cmcrates.remainder import (
    bikjalis_bound,
    fit_bikjalis_constant,
    gamma_exponent,
    h1,
    h2,
    integrated_bikjalis_terms,
    remainder_direct_mc,
    remainder_terms_direct,
    remainder_tail_bound_lambda1,
    remainder_tail_bound_lambda2,
)
from cmcrates.special import normal_tail

SEED = 20240607
RADEMACHER = get_distribution("rademacher")
MS = [1.0, 2.0, 4.0, 8.0]

p_st = st.floats(0.01, 1.99)
q_st = st.floats(2.01, 3.0)


def enum_gap_oracle(n, x):
    """max over both tails of |P(S_n > sqrt(n) x) - P(N > x)|, with both one-sided limits."""
    law = exact_sn_distribution(RADEMACHER, n)
    y = math.sqrt(n) * x
    g = 0.5 * normal_tail(x)
    gaps = [
        sum(w for v, w in law if v > y),
        sum(w for v, w in law if v >= y),
        sum(w for v, w in law if v < -y),
        sum(w for v, w in law if v <= -y),
    ]
    return max(abs(v - g) for v in gaps)


class TestGamma:
    def test_p1_q3(self):
        assert gamma_exponent(1.0, 3.0).gamma == pytest.approx(2 / 3, abs=1e-15)

    @given(p=p_st, q=q_st)
    @settings(max_examples=100, deadline=None)
    def test_identities(self, p, q):
        g = gamma_exponent(p, q).gamma
        assert 0 < g < 1
        assert g * (2 * q - 2 - p) == pytest.approx(q - p, abs=1e-12)
        assert g * (2 - p) + p + q - 4 == pytest.approx(2 * (q - 2) ** 2 / (2 * q - 2 - p), abs=1e-12)
        assert g * (2 - p) + p + q - 4 > 0

    def test_lambda1_rate(self):
        exps = gamma_exponent(1.0, 3.0)
        assert exps.lambda1_rate == pytest.approx(1 / 3)

    @pytest.mark.parametrize("p,q", [(0.0, 3.0), (2.0, 3.0), (1.0, 2.0), (1.0, 3.1)])
    def test_domain(self, p, q):
        with pytest.raises(DomainError):
            gamma_exponent(p, q)


class TestThresholds:
    def test_h1_example(self):
        assert h1(0.1, 1.0, gamma_exponent(1.0, 3.0)) == pytest.approx(10 ** (4 / 3), rel=1e-12)
        assert h1(0.1, 1.0, gamma_exponent(1.0, 3.0)) == pytest.approx(21.544, abs=1e-3)

    def test_h1_monotone_and_linear(self):
        exps = gamma_exponent(0.5, 2.5)
        vals = [h1(e, 1.0, exps) for e in (0.5, 0.1, 0.01)]
        assert vals[0] < vals[1] < vals[2]
        assert h1(0.1, 6.0, exps) / h1(0.1, 3.0, exps) == pytest.approx(2.0)

    def test_h2_example(self):
        assert h2(0.1, 1.0, 1.0, 3.0) == pytest.approx(100 / math.log(10) ** 2, rel=1e-12)
        assert h2(0.1, 1.0, 1.0, 3.0) == pytest.approx(18.86, abs=1e-2)

    def test_h2_grows_and_linear(self):
        vals = [h2(e, 1.0, 0.5, 2.5) for e in (0.3, 0.1, 1e-3, 1e-6)]
        assert np.all(np.diff(vals) > 0)
        assert vals[-1] > 1e9
        assert h2(0.1, 5.0, 1.0, 3.0) / h2(0.1, 1.0, 1.0, 3.0) == pytest.approx(5.0)

    @pytest.mark.parametrize("eps", [math.exp(-1.0), 0.5, 0.0])
    def test_h2_domain(self, eps):
        with pytest.raises(DomainError):
            h2(eps, 1.0, 1.0, 3.0)

    @pytest.mark.parametrize("eps,M", [(1.0, 1.0), (0.1, 0.5)])
    def test_h1_domain(self, eps, M):
        with pytest.raises(DomainError):
            h1(eps, M, gamma_exponent(1.0, 3.0))


class TestBikjalis:
    def test_near_zero(self):
        assert bikjalis_bound(1, 1e-12, 3.0, 1.0) == pytest.approx(1.0)

    def test_quadruple_n_halves(self):
        assert bikjalis_bound(16, 0.7, 3.0, 1.0) / bikjalis_bound(4, 0.7, 3.0, 1.0) == pytest.approx(0.5)

    def test_vectorized(self):
        x = np.array([0.5, 1.0, 2.0])
        out = bikjalis_bound(3, x, 2.5, 2.0, 0.7)
        assert out == pytest.approx([bikjalis_bound(3, v, 2.5, 2.0, 0.7) for v in x])

    @pytest.mark.parametrize("x", [0.0, -1.0])
    def test_domain(self, x):
        with pytest.raises(DomainError):
            bikjalis_bound(2, x, 3.0, 1.0)

    def test_fitted_constant_dominates(self):
        C = fit_bikjalis_constant(RADEMACHER, range(1, 21))
        assert 0.1 < C < 10
        for n in range(1, 21):
            law = exact_sn_distribution(RADEMACHER, n)
            atoms = [abs(v) / math.sqrt(n) for v, _ in law if v != 0]
            for x in sorted(set(atoms + [0.05, 0.3, 0.77, 1.5, 2.2, 4.0])):
                assert enum_gap_oracle(n, x) <= bikjalis_bound(n, x, 3.0, 1.0, C) * (1 + 1e-12)

    def test_fitted_constant_is_tight(self):
        C = fit_bikjalis_constant(RADEMACHER, range(1, 21))
        assert fit_bikjalis_constant(RADEMACHER, range(1, 21)) == C
        # some (n, x) attains the fitted constant
        assert C == pytest.approx(max(fit_bikjalis_constant(RADEMACHER, [n]) for n in range(1, 21)))

    def test_held_out_n(self):
        C_train = fit_bikjalis_constant(RADEMACHER, range(1, 11))
        assert fit_bikjalis_constant(RADEMACHER, range(11, 21)) <= C_train


class TestLambda1TailBound:
    @pytest.mark.parametrize("eps", [0.1, 0.05, 0.01])
    def test_eps_independent(self, eps):
        exps = gamma_exponent(1.0, 3.0)
        ref = remainder_tail_bound_lambda1(0.01, exps).scaled_bound
        assert remainder_tail_bound_lambda1(eps, exps).scaled_bound == pytest.approx(ref, rel=0.1)

    @pytest.mark.parametrize("M", MS)
    def test_below_cap(self, M):
        rep = remainder_tail_bound_lambda1(0.05, gamma_exponent(1.0, 3.0), M)
        assert rep.scaled_bound <= rep.predicted_cap * 1.1
        assert rep.predicted_cap == pytest.approx(1.0 / M)

    def test_M_ratios(self):
        exps = gamma_exponent(1.0, 3.0)
        vals = [remainder_tail_bound_lambda1(0.01, exps, M).scaled_bound for M in MS]
        for M, v in zip(MS, vals):
            assert v / vals[0] == pytest.approx(M ** (2 - 3), rel=0.1)
        assert np.all(np.diff(vals) <= 0)

    def test_sum_bracket(self):
        rep = remainder_tail_bound_lambda1(0.1, gamma_exponent(0.5, 2.5), 2.0)
        q = 2.5
        direct = math.fsum(n ** (1 - q) for n in range(rep.n_start, 10**6)) + (10**6) ** (2 - q) / (q - 2)
        assert rep.sum_lower <= direct <= rep.sum_upper
        assert rep.n_start == math.ceil(rep.threshold)

    def test_finite_nonnegative(self):
        rep = remainder_tail_bound_lambda1(0.3, gamma_exponent(1.9, 2.1), 1.0)
        for v in (rep.raw_bound, rep.scaled_bound, rep.predicted_cap):
            assert math.isfinite(v) and v >= 0


class TestLambda2TailBound:
    @pytest.mark.parametrize("M", MS)
    def test_below_cap(self, M):
        rep = remainder_tail_bound_lambda2(0.01, 1.0, 3.0, M)
        assert rep.scaled_bound <= rep.predicted_cap * 1.1
        assert rep.envelope <= rep.predicted_cap * 1.1

    def test_M_ratios(self):
        vals = [remainder_tail_bound_lambda2(0.01, 1.0, 3.0, M).envelope for M in MS]
        for M, v in zip(MS, vals):
            assert v / vals[0] == pytest.approx(M ** (1 - 3 / 2), rel=0.1)
        assert vals[2] / vals[0] == pytest.approx(0.5, rel=0.1)

    def test_scaled_monotone_in_M(self):
        vals = [remainder_tail_bound_lambda2(0.05, 0.5, 2.5, M).scaled_bound for M in MS]
        assert np.all(np.diff(vals) <= 0)

    def test_log_weight_negative(self):
        for delta in (0.1, 0.5, 1.0):
            for q in (2.01, 2.5, 3.0):
                assert delta - q / 2 < 0

    def test_sum_bracket(self):
        rep = remainder_tail_bound_lambda2(0.1, 0.5, 3.0, 1.0)
        f = lambda x: math.log(x) ** (0.5 - 1.5) * x**-1.5
        head = math.fsum(f(n) for n in range(rep.n_start, 10**5))
        tail, _ = integrate.quad(lambda y: y**-1.0 * math.exp(-0.5 * y), math.log(10**5), np.inf)
        assert rep.sum_lower <= head + tail <= rep.sum_upper
        assert rep.n_start >= 3

    def test_envelope_dominates_scaled(self):
        rep = remainder_tail_bound_lambda2(0.02, 1.0, 3.0, 1.0)
        assert rep.scaled_bound <= rep.envelope


class TestDirectRemainder:
    def test_normal_zero(self):
        cfg = MCConfig(replications=20_000, seed=SEED)
        est = remainder_direct_mc(get_distribution("normal"), 1.0, 0.5, 10, cfg)
        assert est.mean >= 0
        assert est.mean <= 3 * est.stderr

    def test_rademacher_positive_decreasing(self):
        terms, errs = remainder_terms_direct(RADEMACHER, 1.0, 0.5, 20, MCConfig())
        assert np.all(terms > 0)
        assert np.all(errs == 0)
        # per-n contribution decays at least like n^(1 - p/2 - q/2) = n^-1
        scaled = terms * np.arange(1, 21)
        assert np.all(scaled[1:] <= scaled[0])
        assert scaled[10:].mean() < scaled[:10].mean()

    def test_rademacher_exact_and_seed_free(self):
        a = remainder_direct_mc(RADEMACHER, 1.0, 0.5, 20, MCConfig(seed=1))
        b = remainder_direct_mc(RADEMACHER, 1.0, 0.5, 20, MCConfig(seed=2))
        assert a.mean == b.mean and a.stderr == 0.0
        assert a.mean == pytest.approx(0.80429, abs=1e-5)

    @pytest.mark.parametrize("n", [1, 3, 8])
    def test_term_quadrature_oracle(self, n):
        p, eps = 1.0, 0.5
        law = exact_sn_distribution(RADEMACHER, n)

        def G(t):
            return sum(w for v, w in law if abs(v) >= math.sqrt(n) * t)

        knots = sorted({abs(v) / math.sqrt(n) for v, _ in law} | {eps * math.sqrt(n)})
        lo = eps * math.sqrt(n)
        pts = [k for k in knots if k > lo]
        edges = [lo] + pts + [np.inf]
        val = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            v, _ = integrate.quad(lambda t: p * t ** (p - 1) * abs(G(t) - normal_tail(t)), a, b, epsabs=1e-13, limit=200)
            val += v
        terms, _ = remainder_terms_direct(RADEMACHER, p, eps, n, MCConfig())
        assert terms[n - 1] == pytest.approx(n ** (-p / 2) * val, abs=1e-9)

    def test_dominated_by_integrated_bound(self):
        C = fit_bikjalis_constant(RADEMACHER, range(1, 21))
        terms, _ = remainder_terms_direct(RADEMACHER, 1.0, 0.5, 20, MCConfig())
        bound = integrated_bikjalis_terms(range(1, 21), 0.5, 1.0, 3.0, 1.0, C)
        assert np.all(terms <= bound)
        assert terms.sum() <= bound.sum()

    @pytest.mark.parametrize("n_max", [0, 201])
    def test_n_max_domain(self, n_max):
        with pytest.raises(DomainError):
            remainder_terms_direct(RADEMACHER, 1.0, 0.5, n_max, MCConfig())
