"""Remainder machinery for non-Gaussian summands.

1. The rate exponent ``gamma`` and the thresholds ``H_1``, ``H_2``.
2. The scaled tail bounds beyond those thresholds: free of ``eps`` and
   decaying like a power of ``M``.
3. The non-uniform Bikjalis bound: one constant ``C*`` fitted on enumerated
   Rademacher laws for small ``n`` still dominates larger ``n``, and its
   integrated form dominates the directly computed remainder.

Run: ``python demos/remainder_bounds.py``
"""

import math

from cmcrates import (
    MCConfig,
    bikjalis_bound,
    fit_bikjalis_constant,
    gamma_exponent,
    get_distribution,
    h1,
    h2,
    remainder_direct_mc,
    remainder_tail_bound_lambda1,
    remainder_tail_bound_lambda2,
)
from cmcrates.remainder import integrated_bikjalis_terms, remainder_terms_direct


def main():
    p, q, delta = 1.0, 3.0, 1.0
    exps = gamma_exponent(p, q)
    print(f"gamma(p={p}, q={q}) = {exps.gamma:.6f}; required lambda1 rate (1-gamma)(2-p) = {exps.lambda1_rate:.6f}")
    print(f"H_1(0.1, M=1) = {h1(0.1, 1.0, exps):.3f}   H_2(0.1, M=1, delta=1, q=3) = {h2(0.1, 1.0, delta, q):.3f}")

    print("\nScaled lambda1 tail bound (should not depend on eps)")
    for M in (1, 2, 4, 8):
        row = [remainder_tail_bound_lambda1(e, exps, M=M) for e in (0.1, 0.05, 0.01)]
        vals = "  ".join(f"{r.scaled_bound:.4f}" for r in row)
        print(f"  M = {M}: {vals}   cap C Lq M^(2-q)/(q-2) = {row[0].predicted_cap:.4f}")

    print("\nlambda2 envelope at eps = 0.01 against M^(1 - q/2)")
    base = remainder_tail_bound_lambda2(0.01, delta, q, M=1).envelope
    for M in (1, 2, 4, 8):
        env = remainder_tail_bound_lambda2(0.01, delta, q, M=M).envelope
        print(f"  M = {M}: ratio {env / base:.4f}   predicted {M ** (1 - q / 2):.4f}")

    rad = get_distribution("rademacher")
    c_fit = fit_bikjalis_constant(rad, range(1, 11), q=q)
    c_held = fit_bikjalis_constant(rad, range(11, 21), q=q)
    print(f"\nBikjalis constant for Rademacher: fitted on n <= 10: C* = {c_fit:.4f};"
          f" smallest constant needed on 11..20: {c_held:.4f}")
    print(f"  bound at n = 16, x = 1 with C*: {bikjalis_bound(16, 1.0, q, rad.abs_moment(q), c_fit):.4f}")

    cfg = MCConfig(replications=1_000)
    eps, n_max = 0.5, 20
    direct = remainder_direct_mc(rad, p, eps, n_max, cfg)
    terms, _ = remainder_terms_direct(rad, p, eps, n_max, cfg)
    bound = integrated_bikjalis_terms(range(1, n_max + 1), eps, p, q, rad.abs_moment(q), c_fit)
    print(f"\nDirect remainder, Rademacher, p = {p}, eps = {eps}, n <= {n_max}: {direct.mean:.5f}"
          f" (exact enumeration, stderr {direct.stderr})")
    print(f"  integrated Bikjalis bound with C*: {math.fsum(bound):.5f}")
    print("  per-n terms against n^(1 - p/2 - q/2) decay:")
    for n in (1, 2, 5, 10, 20):
        print(f"    n = {n:2d}: term {terms[n - 1]:.5f}   bound {bound[n - 1]:.5f}   n^(1-p/2-q/2) = {n ** (1 - p / 2 - q / 2):.5f}")


if __name__ == "__main__":
    main()
