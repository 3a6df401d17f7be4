"""Log-log rate checks of the Gaussian residuals, with negative controls.

``verify_theorem_2_2a`` fits the slope of ``|eps^(2-p) lambda1 - 2/(2-p)|``
against ``eps`` and compares it with the guaranteed exponent
``(1 - gamma)(2 - p)``; ``verify_theorem_2_2b`` checks that the lambda2
residual, divided by ``eps^(2 delta) (log 1/eps)^delta``, keeps shrinking.  Adding a slowly
decaying bias to the residuals must make both checks fail.

Run: ``python demos/rate_verification.py``
"""

import math

from cmcrates import gamma_exponent, recover_expansion_constants, verify_theorem_2_2a, verify_theorem_2_2b


def main():
    q = 3.0
    print("lambda1 residual rates (Gaussian exact, q = 3)")
    print(f"{'p':>5} {'gamma':>7} {'required':>9} {'fitted':>8} {'2-p':>5} {'pass':>5} {'with eps^0.1 bias':>18}")
    for p in (0.5, 1.0, 1.5):
        exps = gamma_exponent(p, q)
        rep = verify_theorem_2_2a(p, q)
        neg = verify_theorem_2_2a(p, q, inject_bias=lambda e: e**0.1)
        print(f"{p:5.2f} {exps.gamma:7.4f} {rep.required_slope:9.4f} {rep.fitted_slope:8.4f} "
              f"{2 - p:5.2f} {str(rep.passed):>5} {'fails' if not neg.passed else 'PASSES (bad)':>18}")

    print("\nlambda2 residual / (eps^(2 delta) (log 1/eps)^delta) along the default grid")
    for delta in (0.5, 1.0):
        rep = verify_theorem_2_2b(delta, q)
        bias = lambda e, d=delta: 3.0 * e ** (2 * d) * math.log(1 / e) ** d
        neg = verify_theorem_2_2b(delta, q, inject_bias=bias)
        seq = " ".join(f"{s:+.4f}" for s in rep.scaled_sequence)
        print(f"  delta = {delta}: {seq}  pass={rep.passed}, log-biased control passes={neg.passed}")
    print("  (it behaves like C_delta / (log 1/eps)^delta, so its magnitude must keep decreasing)")

    print("\nSecond-order constants recovered by Richardson extrapolation of the residuals")
    for p in (0.5, 1.0, 1.5):
        rec = recover_expansion_constants(p=p)
        print(f"  p = {p}: estimate {rec.constant_estimate:+.6f}, reference {rec.reference:+.6f}, "
              f"rel. error {rec.relative_error:.2e}")
    for delta in (0.5, 1.0):
        rec = recover_expansion_constants(delta=delta)
        print(f"  delta = {delta}: estimate {rec.constant_estimate:+.6f}, reference {rec.reference:+.6f}, "
              f"rel. error {rec.relative_error:.2e}")


if __name__ == "__main__":
    main()
