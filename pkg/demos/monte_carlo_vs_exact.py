"""Monte Carlo estimators against exact oracles.

Normal summands have a closed-form law of ``S_n``; Rademacher summands have
a binomial law that can be enumerated.  Each estimate is printed with its
standard error and its z-score against the oracle, then the truncated
lambda1 series is compared for both laws.  Re-running with the same seed
reproduces every digit.

Run: ``python demos/monte_carlo_vs_exact.py``
"""

import math

import numpy as np

from cmcrates import (
    MCConfig,
    delta_n_estimate,
    estimate_tail_prob,
    estimate_truncated_pth_moment,
    get_distribution,
    lambda1_gaussian,
    lambda1_mc,
    lattice_law,
    normal_tail,
    truncated_abs_moment,
)

CFG = MCConfig(replications=100_000, seed=20240607, n_max=20)


def report(label, est, exact):
    z = (est.mean - exact) / est.stderr if est.stderr > 0 else float("nan")
    print(f"  {label:<38} MC {est.mean:10.6f} +- {est.stderr:.6f}   exact {exact:10.6f}   z = {z:+.2f}")


def rademacher_lambda1_head(p, eps, n_max):
    rad = get_distribution("rademacher")
    total = 0.0
    for n in range(1, n_max + 1):
        values, probs = lattice_law(rad, n)
        a = np.abs(values)
        total += n ** (-p) * float(np.sum(probs * np.where(a >= eps * n, a**p, 0.0)))
    return total


def main():
    normal = get_distribution("normal")
    rad = get_distribution("rademacher")
    n, x = 9, 4.5

    print(f"Tail probability P(|S_n| >= {x}), n = {n}")
    report("normal (closed form)", estimate_tail_prob(normal, n, x, CFG), normal_tail(x / math.sqrt(n)))
    values, probs = lattice_law(rad, n)
    report("rademacher (enumeration)", estimate_tail_prob(rad, n, x, CFG), float(probs[np.abs(values) >= x].sum()))

    print(f"\nTruncated moment E|S_n| I(|S_n| >= {x}), n = {n}")
    exact_normal = n**0.5 * truncated_abs_moment(1.0, x / math.sqrt(n))
    report("normal (incomplete gamma)", estimate_truncated_pth_moment(normal, n, x, 1.0, CFG), exact_normal)
    a = np.abs(values)
    report("rademacher (enumeration)", estimate_truncated_pth_moment(rad, n, x, 1.0, CFG),
           float(np.sum(probs * np.where(a >= x, a, 0.0))))

    p, eps = 1.0, 0.5
    print(f"\nlambda1 truncated at n <= {CFG.n_max}, p = {p}, eps = {eps}")
    est = lambda1_mc(normal, p, eps, CFG)
    report("normal head (series minus tail)", est, lambda1_gaussian(eps, p).value - est.truncation_bias)
    print(f"  {'normal completed with Gaussian tail':<38} {est.completed:10.6f}   full series {lambda1_gaussian(eps, p).value:10.6f}")
    report("rademacher head (enumeration)", lambda1_mc(rad, p, eps, CFG), rademacher_lambda1_head(p, eps, CFG.n_max))

    print("\nSup-distance of |S_n|/sqrt(n) to the normal tail on a 0.01 grid")
    for m in (4, 16, 64):
        print(f"  n = {m:3d}: rademacher {delta_n_estimate(rad, m, CFG):.4f}   normal {delta_n_estimate(normal, m, CFG):.4f}")
    print("  (normal values are pure sampling noise, of order 1/sqrt(replications))")

    again = estimate_tail_prob(rad, n, x, CFG)
    print(f"\nSame seed again gives the same bits: {again == estimate_tail_prob(rad, n, x, CFG)}")


if __name__ == "__main__":
    main()
