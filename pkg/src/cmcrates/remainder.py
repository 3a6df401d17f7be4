"""Rate exponents, split thresholds, the non-uniform Berry-Esseen (Bikjalis)
bound and the remainder sums it controls.

The remainder of the Gaussian approximation is

    R_1(eps) = sum_n n^(-p/2) int_{eps sqrt n}^inf p t^(p-1) |P(|S_n| >= sqrt(n) t) - Phi(t)| dt

(and a log-weighted analogue for lambda_2).  Beyond a threshold ``H`` the
Bikjalis bound turns each term into an explicit power of ``n``; the report
types below carry those tail sums, their integral brackets and the
M-asymptotic caps.  The absolute constant of the Bikjalis bound is not known
in closed form, so it is exposed as ``C_abs`` (default 1) and only scaling
in ``eps`` and ``M`` is meaningful.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .distributions import LATTICE_KINDS, lattice_law
from .errors import DomainError
from .montecarlo import MCEstimate, simulate_partial_sums
from .special import normal_tail, normal_tail_inverse, truncated_abs_moment

__all__ = [
    "RateExponents",
    "BoundReport",
    "gamma_exponent",
    "h1",
    "h2",
    "bikjalis_bound",
    "fit_bikjalis_constant",
    "integrated_bikjalis_terms",
    "remainder_tail_bound_lambda1",
    "remainder_tail_bound_lambda2",
    "remainder_terms_direct",
    "remainder_direct_mc",
]


@dataclass(frozen=True)
class RateExponents:
    p: float
    q: float
    gamma: float

    @property
    def lambda1_rate(self):
        """Required decay exponent ``(1 - gamma)(2 - p)`` of the lambda_1 residual."""
        return (1.0 - self.gamma) * (2.0 - self.p)


@dataclass(frozen=True)
class BoundReport:
    """Tail-sum bound beyond the threshold ``H``.

    ``raw_bound`` uses the upper end of the ``[sum_lower, sum_upper]``
    bracket for the tail sum starting at ``n_start = ceil(threshold)``.
    ``scaled_bound`` multiplies it by the rate normalization, ``envelope``
    is the same quantity with any log weight replaced by its bound 1, and
    ``predicted_cap`` is the limiting value ``C Lq M^(...)``.
    """

    eps: float
    M: float
    raw_bound: float
    scaled_bound: float
    predicted_cap: float
    threshold: float
    n_start: int
    sum_lower: float
    sum_upper: float
    envelope: float


def _check_p(p):
    if not (0.0 < p < 2.0):
        raise DomainError(f"p must lie in (0, 2), got {p!r}")


def _check_q(q):
    if not (2.0 < q <= 3.0):
        raise DomainError(f"q must lie in (2, 3], got {q!r}")


def _check_delta(delta):
    if not (0.0 < delta <= 1.0):
        raise DomainError(f"delta must lie in (0, 1], got {delta!r}")


def _check_M(M):
    if not (M >= 1.0) or not math.isfinite(M):
        raise DomainError(f"M must be >= 1, got {M!r}")


def _check_positive(name, value):
    if not (value > 0) or not math.isfinite(value):
        raise DomainError(f"{name} must be positive and finite, got {value!r}")


def gamma_exponent(p, q):
    """``gamma = (q - p) / (2q - 2 - p)``, always in (0, 1)."""
    _check_p(p)
    _check_q(q)
    g = (q - p) / (2.0 * q - 2.0 - p)
    assert 0.0 < g < 1.0
    return RateExponents(float(p), float(q), g)


def h1(eps, M, exps):
    """Split threshold ``M eps^(-2 gamma)`` for the lambda_1 remainder."""
    if not (0.0 < eps < 1.0):
        raise DomainError(f"eps must lie in (0, 1), got {eps!r}")
    _check_M(M)
    return M * eps ** (-2.0 * exps.gamma)


def h2(eps, M, delta, q):
    """Split threshold ``M eps^-2 (log 1/eps)^(2 delta / (2 - q))`` for lambda_2."""
    if not (0.0 < eps < math.exp(-1.0)):
        raise DomainError(f"eps must lie in (0, 1/e), got {eps!r}")
    _check_M(M)
    _check_delta(delta)
    _check_q(q)
    return M * eps**-2.0 * math.log(1.0 / eps) ** (2.0 * delta / (2.0 - q))


def bikjalis_bound(n, x, q, Lq, C_abs=1.0):
    """``C E|X|^q / (n^(q/2 - 1) (1 + x^q))``, the bound on ``|P(S_n > sqrt(n) x) - P(N > x)|``."""
    if not (n >= 1):
        raise DomainError("n must be >= 1")
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("x must be > 0")
    _check_q(q)
    _check_positive("Lq", Lq)
    _check_positive("C_abs", C_abs)
    out = C_abs * Lq / (n ** (q / 2.0 - 1.0) * (1.0 + x**q))
    return float(out) if out.ndim == 0 else out


def _one_sided_gaps(values, probs, n, x):
    """Largest of the four one-sided gaps at each ``x``: upper and lower tails,
    each with strict and non-strict inequality (the two limits at an atom)."""
    y = math.sqrt(n) * x
    cdf = np.concatenate([[0.0], np.cumsum(probs)])
    cdf[-1] = 1.0
    gauss = 0.5 * normal_tail(x)
    above_strict = 1.0 - cdf[np.searchsorted(values, y, side="right")]
    above_weak = 1.0 - cdf[np.searchsorted(values, y, side="left")]
    below_strict = cdf[np.searchsorted(values, -y, side="left")]
    below_weak = cdf[np.searchsorted(values, -y, side="right")]
    gaps = [np.abs(g - gauss) for g in (above_strict, above_weak, below_strict, below_weak)]
    return np.max(gaps, axis=0)


def fit_bikjalis_constant(dist, n_values, q=3.0, x_grid=None):
    """Smallest ``C`` with ``gap(n, x) <= bikjalis_bound(n, x, q, E|X|^q, C)`` on
    the enumerated laws of ``S_n``.

    The gap is evaluated at every atom of ``|S_n| / sqrt(n)`` (both one-sided
    limits) and on ``x_grid`` (default ``(0, 10]`` in steps of 0.01), which
    together locate the supremum of the piecewise-monotone ratio.
    """
    _check_q(q)
    if x_grid is None:
        x_grid = np.arange(1, 1001) * 0.01
    Lq = dist.abs_moment(q)
    best = 0.0
    for n in n_values:
        values, probs = lattice_law(dist, int(n))
        atoms = np.abs(values[values != 0]) / math.sqrt(n)
        x = np.unique(np.concatenate([np.asarray(x_grid, dtype=float), atoms]))
        x = x[x > 0]
        gap = _one_sided_gaps(values, probs, int(n), x)
        ratio = gap * n ** (q / 2.0 - 1.0) * (1.0 + x**q) / Lq
        best = max(best, float(np.max(ratio)))
    return best


def integrated_bikjalis_terms(ns, eps, p, q, Lq, C_abs=1.0):
    """Per-``n`` integral of the two-sided Bikjalis bound against ``p t^(p-1)``
    over ``t >= eps sqrt(n)``, weighted by ``n^(-p/2)``."""
    _check_p(p)
    _check_q(q)
    out = []
    for n in ns:
        lo = eps * math.sqrt(n)
        val, _ = integrate.quad(lambda t: p * t ** (p - 1.0) / (1.0 + t**q), lo, np.inf, limit=200)
        out.append(n ** (-p / 2.0) * 2.0 * C_abs * Lq * n ** (1.0 - q / 2.0) * val)
    return np.array(out)


def remainder_tail_bound_lambda1(eps, exps, M=1.0, Lq=1.0, C_abs=1.0):
    """Bikjalis-controlled tail of the lambda_1 remainder beyond ``H_1(eps)``.

    ``raw_bound = C Lq eps^(p-q) sum_{n >= H_1} n^(1-q)`` and
    ``scaled_bound = eps^(gamma (2-p)) raw_bound``; the eps exponents cancel,
    so ``scaled_bound`` tends to ``C Lq M^(2-q) / (q-2)``.
    """
    _check_positive("Lq", Lq)
    _check_positive("C_abs", C_abs)
    p, q = exps.p, exps.q
    H = h1(eps, M, exps)
    n0 = math.ceil(H)
    lower = n0 ** (2.0 - q) / (q - 2.0)
    upper = n0 ** (1.0 - q) + lower
    raw = C_abs * Lq * eps ** (p - q) * upper
    scaled = eps ** (exps.gamma * (2.0 - p)) * raw
    cap = C_abs * Lq * M ** (2.0 - q) / (q - 2.0)
    return BoundReport(eps, M, raw, scaled, cap, H, n0, lower, upper, scaled)


def _log_weighted_tail(n0, a, b):
    # int_{n0}^inf (log x)^a x^-(b+1) dx, with y = log x.
    val, _ = integrate.quad(lambda y: y**a * math.exp(-b * y), math.log(n0), np.inf, limit=200)
    return val


def remainder_tail_bound_lambda2(eps, delta, q, M=1.0, Lq=1.0, C_abs=1.0):
    """Bikjalis-controlled tail of the lambda_2 remainder beyond ``H_2(eps)``.

    ``raw_bound = C Lq eps^(2-q) sum_{n >= H_2} (log n)^(delta - q/2) n^(-q/2)``
    and ``scaled_bound = (log 1/eps)^(-delta) raw_bound``.  Because
    ``delta - q/2 < 0`` the log weight is at most 1 for ``n >= 3``; dropping it
    gives ``envelope``, whose eps exponents cancel exactly and which tends to
    ``C Lq M^(1-q/2) / (q/2 - 1)``.
    """
    _check_positive("Lq", Lq)
    _check_positive("C_abs", C_abs)
    a = delta - q / 2.0
    assert a < 0.0
    b = q / 2.0 - 1.0
    H = h2(eps, M, delta, q)
    n0 = max(math.ceil(H), 3)
    lower = _log_weighted_tail(n0, a, b)
    upper = math.log(n0) ** a * n0 ** (-q / 2.0) + lower
    log_scale = math.log(1.0 / eps) ** (-delta)
    raw = C_abs * Lq * eps ** (2.0 - q) * upper
    scaled = log_scale * raw
    plain_upper = n0 ** (-q / 2.0) + n0 ** (1.0 - q / 2.0) / b
    envelope = C_abs * Lq * log_scale * eps ** (2.0 - q) * plain_upper
    cap = C_abs * Lq * M ** (1.0 - q / 2.0) / b
    return BoundReport(eps, M, raw, scaled, cap, H, n0, lower, upper, envelope)


def _abs_gap_integral(a, b, c, p):
    """``int_a^b p t^(p-1) |c - Phi(t)| dt`` for ``0 <= a < b <= inf``, ``c`` in [0, 1].

    Uses ``int_a^b p t^(p-1) Phi(t) dt = K(a) - K(b)`` with
    ``K(t) = m_p(t) - t^p Phi(t)`` and splits at the crossing ``Phi(t*) = c``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)

    def K(t):
        finite = np.isfinite(t)
        tf = np.where(finite, t, 0.0)
        val = truncated_abs_moment(p, tf) - tf**p * normal_tail(tf)
        return np.where(finite, val, 0.0)

    def power(t):
        # Only ever paired with c > 0, which forces a finite upper limit.
        return np.where(np.isfinite(t), t, 0.0) ** p

    def signed(lo, hi):
        # int_lo^hi p t^(p-1) (c - Phi(t)) dt on a piece of constant sign.
        live = hi > lo
        width = np.where(live & (c > 0), c * (power(hi) - power(lo)), 0.0)
        return np.abs(width - np.where(live, K(lo) - K(hi), 0.0))

    with np.errstate(divide="ignore", invalid="ignore"):
        star = np.where(c <= 0.0, np.inf, np.where(c >= 1.0, 0.0, normal_tail_inverse(np.clip(c, 1e-300, 1.0))))
    mid = np.clip(star, a, b)
    return signed(a, mid) + signed(mid, b)


def _law_of_scaled_abs(dist, n, cfg):
    """Atoms and weights of ``|S_n| / sqrt(n)``: exact for lattice laws, empirical otherwise."""
    if dist.kind in LATTICE_KINDS:
        values, probs = lattice_law(dist, n)
        return np.abs(values) / math.sqrt(n), probs, True
    s = np.abs(simulate_partial_sums(dist, n, cfg)) / math.sqrt(n)
    return s, np.full(s.size, 1.0 / s.size), False


def _direct_term(atoms, weights, lo, p, reps):
    """``int_lo^inf p t^(p-1) |G(t) - Phi(t)| dt`` for the step function
    ``G(t) = P(A >= t)`` of the discrete law ``(atoms, weights)``, plus a
    sampling-error scale ``sum sqrt(G (1 - G) / reps) (b^p - a^p)``."""
    order = np.argsort(atoms, kind="stable")
    atoms = atoms[order]
    weights = weights[order]
    ux, idx = np.unique(atoms, return_index=True)
    w = np.add.reduceat(weights, idx)
    # G on (ux[j-1], ux[j]] equals P(A >= ux[j]) = tail[j]; beyond the top atom G = 0.
    tail = np.clip(np.cumsum(w[::-1])[::-1], 0.0, 1.0)
    keep = ux > lo
    right = np.concatenate([ux[keep], [np.inf]])
    left = np.concatenate([[lo], ux[keep]])
    level = np.concatenate([tail[keep], [0.0]])
    value = math.fsum(_abs_gap_integral(left, right, level, p))
    if reps is None:
        return value, 0.0
    span = np.where(np.isfinite(right), right, 0.0) ** p - left**p
    span = np.where(np.isfinite(right), span, 0.0)
    err = math.fsum(np.sqrt(level * (1.0 - level) / reps) * span)
    return value, err


def remainder_terms_direct(dist, p, eps, n_max, cfg):
    """Per-``n`` contributions ``n^(-p/2) int_{eps sqrt n}^inf p t^(p-1) |G_n(t) - Phi(t)| dt``
    for ``n = 1..n_max``, with their sampling-error scales (zero for lattice laws)."""
    _check_p(p)
    if not (eps > 0):
        raise DomainError("eps must be > 0")
    if not (1 <= n_max <= 200):
        raise DomainError("n_max must lie in [1, 200]")
    terms = []
    errs = []
    for n in range(1, int(n_max) + 1):
        atoms, weights, exact = _law_of_scaled_abs(dist, n, cfg)
        v, e = _direct_term(atoms, weights, eps * math.sqrt(n), p, None if exact else cfg.replications)
        terms.append(n ** (-p / 2.0) * v)
        errs.append(n ** (-p / 2.0) * e)
    return np.array(terms), np.array(errs)


def remainder_direct_mc(dist, p, eps, n_max, cfg):
    """Truncated remainder ``sum_{n <= n_max}`` of the Gaussian approximation
    error.  Lattice laws are enumerated exactly; other laws use the empirical
    tail curve of ``cfg.replications`` simulated sums.

    ``stderr`` sums the per-interval binomial scales, which over-covers the
    correlated sampling error; it is zero for enumerated laws.
    """
    terms, errs = remainder_terms_direct(dist, p, eps, n_max, cfg)
    return MCEstimate(math.fsum(terms), math.fsum(errs), cfg.replications, cfg.seed)
