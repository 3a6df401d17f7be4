"""Exact series for Gaussian summands, where ``S_n / (sigma sqrt(n))`` is standard normal.

With ``m_p(a) = E[|N|^p I{|N| >= a}]`` and ``Phi(a) = P(|N| >= a)``:

    lambda1(eps, p)   = sigma^p  sum_{n>=1} n^(-p/2) m_p(eps sqrt(n) / sigma)
    lambda2(eps, delta) = sigma^2 sum_{n>=2} (log n)^(delta-1) / n * m_2(eps sqrt(log n) / sigma)
    klesov(eps)       = sum_{n>=1} Phi(eps sqrt(n) / sigma)
    log_tail(eps, delta) = sum_{n>=2} (log n)^delta / n * Phi(eps sqrt(log n) / sigma)

Every series is summed exactly up to a cut ``N`` and the rest is replaced by
the Euler-Maclaurin closure

    sum_{n>=N} f(n) = int_N^inf f + f(N)/2 - f'(N)/12 + R,   |R| <= int_N^inf |f''| / 12.

The tail integrals have closed forms in ``m_p`` (after substituting
``s = eps sqrt(n)/sigma`` or ``s = eps sqrt(log n)/sigma``).  ``N`` is doubled
until ``f'`` is nondecreasing on a sample of ``[N, 1000 N]`` (so the remainder
is at most ``|f'(N)|/12``) and the reported ``tail_bound = |f'(N)|/6`` meets
the tolerance.

The ``p = 0`` case of ``lambda1`` is ``klesov_sum_gaussian``; note that this
is ``sum P(|S_n| >= eps n)`` without any ``n^-2`` weight.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceededError, DomainError
from .special import normal_abs_moment, normal_density, normal_tail, truncated_abs_moment

__all__ = [
    "SeriesValue",
    "EPS_MIN_LAMBDA1",
    "EPS_MIN_LAMBDA2",
    "P_MAX",
    "lambda1_gaussian",
    "lambda1_parts_gaussian",
    "lambda2_gaussian",
    "lambda2_parts_gaussian",
    "klesov_sum_gaussian",
    "log_tail_sum_gaussian",
    "lambda1_terms",
    "lambda2_terms",
    "lambda1_tail",
    "lambda2_tail",
    "lambda1_limit",
    "lambda2_limit",
]

EPS_MIN_LAMBDA1 = 0.02
EPS_MIN_LAMBDA2 = 0.05
P_MAX = 1.95
MAX_TERMS = 10**8
DEFAULT_TOL = 1e-9
_BLOCK = 1 << 18


@dataclass(frozen=True)
class SeriesValue:
    """Value of an infinite series.

    The true sum lies within ``value +- tail_bound``; ``n_terms`` terms were
    summed explicitly and the rest is covered by ``closure``
    (``"none"``, ``"geometric_bound"`` or ``"integral_closure"``).
    """

    value: float
    n_terms: int
    tail_bound: float
    closure: str


class _Series:
    """A positive decreasing series ``sum_{n >= first} f(n)`` with closed-form tail."""

    def __init__(self, term, dterm, tail, first, n_start):
        self.term = term
        self.dterm = dterm
        self.tail = tail
        self.first = first
        self.n_start = n_start

    def _converged(self, n, tol):
        bound = abs(float(self.dterm(np.array([float(n)]))[0])) / 6.0
        if bound > tol:
            return False, bound
        xs = n * np.geomspace(1.0, 1e3, 64)
        d = self.dterm(xs)
        return bool(np.all(np.diff(d) >= -1e-300)), bound

    def evaluate(self, tol, label):
        if not (tol > 0) or not math.isfinite(tol):
            raise DomainError(f"tol must be positive, got {tol!r}")
        blocks = []
        pos = self.first
        n = max(self.n_start, self.first + 1)
        bound = math.inf
        while n <= MAX_TERMS:
            while pos < n:
                hi = min(pos + _BLOCK, n)
                blocks.append(math.fsum(self.term(np.arange(pos, hi, dtype=float))))
                pos = hi
            ok, bound = self._converged(n, tol)
            if ok:
                nf = np.array([float(n)])
                closure = (
                    float(self.tail(float(n)))
                    + 0.5 * float(self.term(nf)[0])
                    - float(self.dterm(nf)[0]) / 12.0
                )
                value = math.fsum(blocks + [closure])
                return SeriesValue(value, n - self.first, bound, "integral_closure")
            n *= 2
        raise BudgetExceededError(
            f"{label}: tolerance {tol:g} not reached within {MAX_TERMS} terms "
            f"(last remainder bound {bound:.3g})",
            cost=MAX_TERMS,
        )


def _check_common(eps, sigma, tol):
    if not (eps > 0) or not math.isfinite(eps):
        raise DomainError(f"eps must be positive and finite, got {eps!r}")
    if not (sigma > 0) or not math.isfinite(sigma):
        raise DomainError(f"sigma must be positive and finite, got {sigma!r}")
    if not (tol > 0):
        raise DomainError(f"tol must be positive, got {tol!r}")


def _check_p(p):
    if not (0.0 < p <= P_MAX):
        raise DomainError(f"p must lie in (0, {P_MAX}], got {p!r}")


def _check_delta(delta):
    if not (0.0 < delta <= 1.0):
        raise DomainError(f"delta must lie in (0, 1], got {delta!r}")


def _refuse_small_eps(eps, sigma, eps_min, family):
    a = eps / sigma
    if a < eps_min:
        # Terms only start to decay geometrically once eps^2 n / sigma^2 >> 1.
        cost = int(2 * 40 / a**2) if family == "lambda1" else int(2 * 40 / a**2) * 10**4
        raise BudgetExceededError(
            f"eps/sigma={a:g} is below the {family} limit {eps_min}; "
            f"an honest evaluation would need roughly {cost:.3g} terms",
            cost=cost,
        )


# -- lambda1 family ---------------------------------------------------------


def lambda1_terms(n, eps, p, sigma=1.0):
    """Terms ``sigma^p n^(-p/2) m_p(eps sqrt(n)/sigma)`` of lambda1."""
    n = np.asarray(n, dtype=float)
    s = eps * np.sqrt(n) / sigma
    return sigma**p * n ** (-0.5 * p) * truncated_abs_moment(p, s)


def _lambda1_dterms(x, eps, p, sigma):
    s = eps * np.sqrt(x) / sigma
    return sigma**p * x ** (-0.5 * p - 1.0) * (
        -0.5 * p * truncated_abs_moment(p, s) - s ** (p + 1.0) * normal_density(s)
    )


def lambda1_tail(n, eps, p, sigma=1.0):
    """``int_n^inf sigma^p x^(-p/2) m_p(eps sqrt(x)/sigma) dx`` in closed form."""
    s0 = eps * math.sqrt(n) / sigma
    inner = (truncated_abs_moment(2.0, s0) - s0 ** (2.0 - p) * truncated_abs_moment(p, s0)) / (2.0 - p)
    return 2.0 * sigma**2 * eps ** (p - 2.0) * inner


def _head1_terms(x, eps, p, sigma):
    return eps**p * normal_tail(eps * np.sqrt(x) / sigma)


def _head1_dterms(x, eps, p, sigma):
    s = eps * np.sqrt(x) / sigma
    return -(eps**p) * s * normal_density(s) / x


def _head1_tail(n, eps, p, sigma):
    s0 = eps * math.sqrt(n) / sigma
    return eps ** (p - 2.0) * sigma**2 * (truncated_abs_moment(2.0, s0) - s0 * s0 * normal_tail(s0))


def _lambda1_series(eps, p, sigma):
    return _Series(
        lambda x: lambda1_terms(x, eps, p, sigma),
        lambda x: _lambda1_dterms(x, eps, p, sigma),
        lambda n: lambda1_tail(n, eps, p, sigma),
        1,
        64,
    )


def lambda1_gaussian(eps, p, sigma=1.0, tol=DEFAULT_TOL):
    """``lambda1(eps, p) = sum_n n^-p E[|S_n|^p I{|S_n| >= eps n}]`` for Gaussian summands."""
    _check_common(eps, sigma, tol)
    _check_p(p)
    _refuse_small_eps(eps, sigma, EPS_MIN_LAMBDA1, "lambda1")
    return _lambda1_series(eps, p, sigma).evaluate(tol, "lambda1_gaussian")


def lambda1_parts_gaussian(eps, p, sigma=1.0, tol=DEFAULT_TOL):
    """Split lambda1 into ``eps^p sum P(|S_n| >= eps n)`` and the tail-integral part.

    The second part is ``sum_n n^-p int_{eps n}^inf p x^(p-1) P(|S_n| >= x) dx``;
    per term it equals ``sigma^p n^(-p/2) (m_p(s) - s^p Phi(s))``.
    """
    _check_common(eps, sigma, tol)
    _check_p(p)
    _refuse_small_eps(eps, sigma, EPS_MIN_LAMBDA1, "lambda1")
    head = _Series(
        lambda x: _head1_terms(x, eps, p, sigma),
        lambda x: _head1_dterms(x, eps, p, sigma),
        lambda n: _head1_tail(n, eps, p, sigma),
        1,
        64,
    ).evaluate(tol, "lambda1 head")
    rest = _Series(
        lambda x: lambda1_terms(x, eps, p, sigma) - _head1_terms(x, eps, p, sigma),
        lambda x: _lambda1_dterms(x, eps, p, sigma) - _head1_dterms(x, eps, p, sigma),
        lambda n: lambda1_tail(n, eps, p, sigma) - _head1_tail(n, eps, p, sigma),
        1,
        64,
    ).evaluate(tol, "lambda1 integral part")
    return head, rest


def klesov_sum_gaussian(eps, tol=DEFAULT_TOL, sigma=1.0):
    """``sum_{n>=1} P(|S_n| >= eps n) = sum Phi(eps sqrt(n)/sigma)``; about ``sigma^2/eps^2 - 1/2``."""
    _check_common(eps, sigma, tol)
    _refuse_small_eps(eps, sigma, EPS_MIN_LAMBDA1, "lambda1")
    return _Series(
        lambda x: _head1_terms(x, eps, 0.0, sigma),
        lambda x: _head1_dterms(x, eps, 0.0, sigma),
        lambda n: _head1_tail(n, eps, 0.0, sigma),
        1,
        64,
    ).evaluate(tol, "klesov_sum_gaussian")


# -- lambda2 family ---------------------------------------------------------


def lambda2_terms(n, eps, delta, sigma=1.0):
    """Terms ``sigma^2 (log n)^(delta-1) / n * m_2(eps sqrt(log n)/sigma)`` of lambda2."""
    n = np.asarray(n, dtype=float)
    ln = np.log(n)
    s = eps * np.sqrt(ln) / sigma
    return sigma**2 * ln ** (delta - 1.0) / n * truncated_abs_moment(2.0, s)


def _lambda2_dterms(x, eps, delta, sigma):
    ln = np.log(x)
    s = eps * np.sqrt(ln) / sigma
    return sigma**2 * ln ** (delta - 2.0) / (x * x) * (
        (delta - 1.0 - ln) * truncated_abs_moment(2.0, s) - s**3 * normal_density(s)
    )


def lambda2_tail(n, eps, delta, sigma=1.0):
    """``int_n^inf`` of the lambda2 term function, in closed form."""
    s0 = eps * math.sqrt(math.log(n)) / sigma
    inner = (
        truncated_abs_moment(2.0 * delta + 2.0, s0) - s0 ** (2.0 * delta) * truncated_abs_moment(2.0, s0)
    ) / (2.0 * delta)
    return 2.0 * sigma ** (2.0 * delta + 2.0) * eps ** (-2.0 * delta) * inner


def _logtail_terms(x, eps, delta, sigma):
    ln = np.log(x)
    return ln**delta / x * normal_tail(eps * np.sqrt(ln) / sigma)


def _logtail_dterms(x, eps, delta, sigma):
    ln = np.log(x)
    s = eps * np.sqrt(ln) / sigma
    return ln ** (delta - 1.0) / (x * x) * ((delta - ln) * normal_tail(s) - s * normal_density(s))


def _logtail_tail(n, eps, delta, sigma):
    s0 = eps * math.sqrt(math.log(n)) / sigma
    inner = (
        truncated_abs_moment(2.0 * delta + 2.0, s0) - s0 ** (2.0 * delta + 2.0) * normal_tail(s0)
    ) / (2.0 * delta + 2.0)
    return 2.0 * sigma ** (2.0 * delta + 2.0) * eps ** (-2.0 * delta - 2.0) * inner


_N0_LAMBDA2 = 10**4


def _logtail_series(eps, delta, sigma, scale=1.0):
    return _Series(
        lambda x: scale * _logtail_terms(x, eps, delta, sigma),
        lambda x: scale * _logtail_dterms(x, eps, delta, sigma),
        lambda n: scale * _logtail_tail(n, eps, delta, sigma),
        2,
        _N0_LAMBDA2,
    )


def lambda2_gaussian(eps, delta, sigma=1.0, tol=DEFAULT_TOL):
    """``lambda2(eps, delta) = sum_{n>=2} (log n)^(delta-1)/n^2 E[S_n^2 I{|S_n| >= eps sqrt(n log n)}]``."""
    _check_common(eps, sigma, tol)
    _check_delta(delta)
    _refuse_small_eps(eps, sigma, EPS_MIN_LAMBDA2, "lambda2")
    return _Series(
        lambda x: lambda2_terms(x, eps, delta, sigma),
        lambda x: _lambda2_dterms(x, eps, delta, sigma),
        lambda n: lambda2_tail(n, eps, delta, sigma),
        2,
        _N0_LAMBDA2,
    ).evaluate(tol, "lambda2_gaussian")


def lambda2_parts_gaussian(eps, delta, sigma=1.0, tol=DEFAULT_TOL):
    """Split lambda2 into ``eps^2 sum (log n)^delta/n P(|S_n| >= eps sqrt(n log n))``
    and ``sum (log n)^(delta-1)/n^2 int_{eps sqrt(n log n)}^inf 2x P(|S_n| >= x) dx``."""
    _check_common(eps, sigma, tol)
    _check_delta(delta)
    _refuse_small_eps(eps, sigma, EPS_MIN_LAMBDA2, "lambda2")
    e2 = eps * eps
    head = _logtail_series(eps, delta, sigma, scale=e2).evaluate(tol, "lambda2 head")
    rest = _Series(
        lambda x: lambda2_terms(x, eps, delta, sigma) - e2 * _logtail_terms(x, eps, delta, sigma),
        lambda x: _lambda2_dterms(x, eps, delta, sigma) - e2 * _logtail_dterms(x, eps, delta, sigma),
        lambda n: lambda2_tail(n, eps, delta, sigma) - e2 * _logtail_tail(n, eps, delta, sigma),
        2,
        _N0_LAMBDA2,
    ).evaluate(tol, "lambda2 integral part")
    return head, rest


def log_tail_sum_gaussian(eps, delta, tol=DEFAULT_TOL, sigma=1.0):
    """``sum_{n>=2} (log n)^delta / n * P(|S_n| >= eps sqrt(n log n))``.

    Grows like ``eps^(-2 delta - 2) E|N|^(2 delta + 2) / (delta + 1)``.
    """
    _check_common(eps, sigma, tol)
    _check_delta(delta)
    _refuse_small_eps(eps, sigma, EPS_MIN_LAMBDA2, "lambda2")
    return _logtail_series(eps, delta, sigma).evaluate(tol, "log_tail_sum_gaussian")


def lambda1_limit(p, sigma=1.0):
    """``2 sigma^2 / (2 - p)``."""
    return 2.0 * sigma**2 / (2.0 - p)


def lambda2_limit(delta, sigma=1.0):
    """``sigma^(2 delta + 2) E|N|^(2 delta + 2) / delta``."""
    return sigma ** (2.0 * delta + 2.0) * normal_abs_moment(2.0 * delta + 2.0) / delta
