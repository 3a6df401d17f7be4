"""Exact Gaussian series against their first- and second-order limits.

For standard normal summands ``S_n / sqrt(n)`` is exactly N(0, 1), so both
truncated-moment series can be summed to ~1e-9.  The script prints the
normalized series next to the leading limit and the one-term corrected
prediction built from ``B_theta`` and ``C_delta``.

Run: ``python demos/limits_and_constants.py``
"""

from cmcrates import b_limit, c_limit, lambda1_gaussian, lambda1_limit, lambda2_gaussian, lambda2_limit
from cmcrates.special import normal_abs_moment


def lambda1_table(p, eps_values):
    lead = lambda1_limit(p)
    corr = b_limit(-p / 2).value * normal_abs_moment(p)
    print(f"\nlambda1, p = {p}: limit 2/(2-p) = {lead:.6f}, correction constant {corr:+.6f}")
    print(f"{'eps':>8} {'eps^(2-p) lambda1':>20} {'lead + corr eps^(2-p)':>24} {'rel. gap to lead':>18}")
    for eps in eps_values:
        v = eps ** (2 - p) * lambda1_gaussian(eps, p).value
        pred = lead + corr * eps ** (2 - p)
        print(f"{eps:8.3f} {v:20.8f} {pred:24.8f} {(v - lead) / lead:18.2%}")


def lambda2_table(delta, eps_values):
    lead = lambda2_limit(delta)
    corr = c_limit(delta).value
    print(f"\nlambda2, delta = {delta}: limit = {lead:.6f}, C_delta = {corr:+.6f}")
    print(f"{'eps':>8} {'eps^(2 delta) lambda2':>22} {'lead + C eps^(2 delta)':>24} {'rel. gap to lead':>18}")
    for eps in eps_values:
        v = eps ** (2 * delta) * lambda2_gaussian(eps, delta).value
        pred = lead + corr * eps ** (2 * delta)
        print(f"{eps:8.3f} {v:22.8f} {pred:24.8f} {(v - lead) / lead:18.2%}")


def main():
    print("Second-order constants")
    for theta in (-0.75, -0.5, -0.25):
        est = b_limit(theta)
        print(f"  B_theta({theta:+.2f}) = {est.value:+.10f}  (+- {est.error_bound:.1e}, {est.method})")
    for delta in (0.5, 1.0):
        est = c_limit(delta)
        print(f"  C_delta({delta:.2f})  = {est.value:+.10f}  (+- {est.error_bound:.1e}, {est.method})")
    print(f"  reference: Euler gamma - 1 = {0.5772156649015329 - 1:+.10f}")

    for p in (0.5, 1.0, 1.5):
        lambda1_table(p, (0.2, 0.1, 0.05, 0.02))
    for delta in (0.5, 1.0):
        lambda2_table(delta, (0.3, 0.2, 0.1, 0.05))

    # The slow approach at p = 1.5 is the correction term, not an error:
    p, eps = 1.5, 0.02
    print(f"\nAt p = {p}, eps = {eps} the correction alone is "
          f"{b_limit(-p / 2).value * normal_abs_moment(p) * eps ** (2 - p) / lambda1_limit(p):+.2%} of the limit.")
    print(f"It falls below 5% only once eps < {(0.05 * lambda1_limit(p) / abs(b_limit(-p / 2).value * normal_abs_moment(p))) ** (1 / (2 - p)):.4f}.")
    print(f"Likewise C_0.5 * 0.1 / limit = {c_limit(0.5).value * 0.1 / lambda2_limit(0.5):+.2%} for lambda2 at delta = 0.5.")


if __name__ == "__main__":
    main()
