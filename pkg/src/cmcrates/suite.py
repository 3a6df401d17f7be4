"""Self-contained verification suite behind ``cmcrates verify-all``.

Every check is deterministic for a fixed seed.  ``quick`` runs the Monte
Carlo checks with fewer replications; the analytic checks are identical in
both modes.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from .constants import b_limit, c_limit
from .distributions import get_distribution, lattice_law
from .gaussian import lambda1_gaussian, lambda1_limit, lambda2_gaussian, lambda2_limit
from .montecarlo import MCConfig, estimate_tail_prob, estimate_truncated_pth_moment, lambda1_mc
from .rates import recover_expansion_constants, verify_theorem_2_2a, verify_theorem_2_2b
from .remainder import (
    fit_bikjalis_constant,
    gamma_exponent,
    remainder_tail_bound_lambda1,
    remainder_tail_bound_lambda2,
)
from .special import normal_tail, truncated_abs_moment

__all__ = ["CheckResult", "run_suite"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    target: float
    tolerance: float

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))
        for name in ("value", "target", "tolerance"):
            object.__setattr__(self, name, float(getattr(self, name)))


def _rel(name, value, target, tol):
    return CheckResult(name, abs(value - target) <= tol * abs(target), value, target, tol)


def _abs(name, value, target, tol):
    return CheckResult(name, abs(value - target) <= tol, value, target, tol)


def _flag(name, ok, value=float("nan")):
    return CheckResult(name, bool(ok), value, 1.0, 0.0)


def _limits():
    out = []
    for p in (0.5, 1.0, 1.5):
        eps = 0.02
        scaled = eps ** (2.0 - p) * lambda1_gaussian(eps, p).value
        out.append(_rel(f"lambda1_limit p={p} eps={eps}", scaled, lambda1_limit(p), 0.05))
    out.append(_abs("lambda2_limit delta=1 eps=0.1", 0.01 * lambda2_gaussian(0.1, 1.0).value, 3.0, 0.03))
    out.append(
        _rel("lambda2_limit delta=0.5 eps=0.1", 0.1 * lambda2_gaussian(0.1, 0.5).value, lambda2_limit(0.5), 0.03)
    )
    return out


def _constants():
    out = [
        _abs("b_limit(-0.5)", b_limit(-0.5, tol=1e-7).value, float(sp.zeta(0.5)), 1e-6),
        _abs("c_limit(1)", c_limit(1.0, tol=1e-7).value, float(np.euler_gamma - 1.0), 1e-6),
    ]
    for p in (0.5, 1.0, 1.5):
        r = recover_expansion_constants(p=p)
        out.append(CheckResult(f"recover B_(-p/2) E|N|^p p={p}", r.relative_error <= 0.02, r.constant_estimate, r.reference, 0.02))
    for d in (0.5, 1.0):
        r = recover_expansion_constants(delta=d)
        out.append(CheckResult(f"recover C_delta delta={d}", r.relative_error <= 0.05, r.constant_estimate, r.reference, 0.05))
    return out


def _rates():
    out = []
    for p in (0.5, 1.0, 1.5):
        rep = verify_theorem_2_2a(p, 3.0)
        ok = rep.passed and abs(rep.fitted_slope - (2.0 - p)) <= 0.1
        out.append(_flag(f"lambda1 rate p={p} q=3", ok, rep.fitted_slope))
        neg = verify_theorem_2_2a(p, 3.0, inject_bias=lambda e: e**0.1)
        out.append(_flag(f"lambda1 rate p={p} injected eps^0.1 fails", not neg.passed, neg.fitted_slope))
    for d in (0.5, 1.0):
        rep = verify_theorem_2_2b(d, 3.0)
        out.append(_flag(f"lambda2 rate delta={d} q=3", rep.passed, rep.scaled_sequence[-1]))
        neg = verify_theorem_2_2b(d, 3.0, inject_bias=lambda e, d=d: e ** (2 * d) * math.log(1 / e) ** d)
        out.append(_flag(f"lambda2 rate delta={d} injected control fails", not neg.passed, neg.scaled_sequence[-1]))
    return out


def _exponents(rng):
    p = rng.uniform(0.0, 2.0, 1000)
    q = rng.uniform(2.0, 3.0, 1000)
    p = np.where(p > 0, p, 1.0)
    q = np.where(q > 2, q, 3.0)
    worst = 0.0
    for pi, qi in zip(p, q):
        g = gamma_exponent(float(pi), float(qi)).gamma
        d = 2.0 * qi - 2.0 - pi
        worst = max(worst, abs(g * d - (qi - pi)), abs(g * (2 - pi) + pi + qi - 4 - 2 * (qi - 2) ** 2 / d))
    return [CheckResult("exponent identities (1000 draws)", worst <= 1e-12, worst, 0.0, 1e-12)]


def _remainder():
    exps = gamma_exponent(1.0, 3.0)
    s = [remainder_tail_bound_lambda1(e, exps).scaled_bound for e in (0.1, 0.05, 0.01)]
    out = [CheckResult("lambda1 tail bound eps-free", max(s) / min(s) - 1 <= 0.1, max(s) / min(s), 1.0, 0.1)]
    b1 = [remainder_tail_bound_lambda1(0.01, exps, M).scaled_bound for M in (1, 2, 4, 8)]
    b2 = [remainder_tail_bound_lambda2(0.01, 1.0, 3.0, M).envelope for M in (1, 2, 4, 8)]
    for M, a, b in zip((2, 4, 8), b1[1:], b2[1:]):
        out.append(_rel(f"lambda1 M-ratio M={M}", a / b1[0], M ** -1.0, 0.1))
        out.append(_rel(f"lambda2 M-ratio M={M}", b / b2[0], M ** -0.5, 0.1))
    rad = get_distribution("rademacher")
    c_fit = fit_bikjalis_constant(rad, range(1, 11))
    c_new = fit_bikjalis_constant(rad, range(11, 21))
    out.append(CheckResult("Bikjalis constant from n<=10 covers n in 11..20", c_new <= c_fit, c_new, c_fit, 0.0))
    return out


def _montecarlo(reps, seed):
    cfg = MCConfig(replications=reps, seed=seed, n_max=30)
    normal = get_distribution("normal")
    rad = get_distribution("rademacher")
    out = []

    def within(name, est, target):
        z = abs(est.mean - target) / est.stderr if est.stderr > 0 else (0.0 if est.mean == target else math.inf)
        out.append(CheckResult(name, z <= 3.0, est.mean, target, 3.0 * est.stderr))

    within("MC tail normal n=9 x=3", estimate_tail_prob(normal, 9, 3.0, cfg), normal_tail(1.0))
    within("MC tail rademacher n=2 x=1.5", estimate_tail_prob(rad, 2, 1.5, cfg), 0.5)
    within("MC moment normal n=4 a=2 p=1", estimate_truncated_pth_moment(normal, 4, 2.0, 1.0, cfg), 2 * truncated_abs_moment(1.0, 1.0))
    vals, probs = lattice_law(rad, 20)
    exact = float(np.dot(probs, np.where(np.abs(vals) >= 6.0, np.abs(vals) ** 1.5, 0.0)))
    within("MC moment rademacher n=20 a=6 p=1.5", estimate_truncated_pth_moment(rad, 20, 6.0, 1.5, cfg), exact)
    est = lambda1_mc(normal, 1.0, 0.3, cfg)
    head = lambda1_gaussian(0.3, 1.0).value - est.truncation_bias
    within("MC lambda1 normal eps=0.3 p=1 (truncated)", est, head)
    again = lambda1_mc(normal, 1.0, 0.3, cfg)
    out.append(_flag("MC determinism", again == est, est.mean))
    return out


def run_suite(quick=True, seed=20240607):
    """Run every check; returns a list of :class:`CheckResult` in a fixed order."""
    rng = np.random.Generator(np.random.Philox(key=[seed, 0]))
    results = []
    results += _limits()
    results += _constants()
    results += _rates()
    results += _exponents(rng)
    results += _remainder()
    results += _montecarlo(20_000 if quick else 100_000, seed)
    return results
