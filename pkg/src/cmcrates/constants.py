"""Corrected partial sums ``B_{n,theta}``, ``C_{n,delta}`` and their limits.

    B_{n,theta} = sum_{j=1}^n j^theta - n^(theta+1) / (theta+1),    -1 < theta < 0
    C_{n,delta} = sum_{j=2}^n (log j)^(delta-1) / j - (log n)^delta / delta,   0 < delta <= 1

Both sequences converge at a known rate (``O(n^theta)`` and
``O((log n)^(delta-1) / n)``).  The limits are obtained by fitting
``limit + K1 * rate(n) + K2 * rate(n) / n`` through consecutive points of a
doubling ladder of ``n``; the error bound is four times the change between
successive fits.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceededError, DomainError

__all__ = [
    "SequenceLimitEstimate",
    "b_seq",
    "c_seq",
    "b_limit",
    "c_limit",
    "MAX_TERMS",
]

MAX_TERMS = 10**8
_BLOCK = 1 << 20
_SAFETY = 4.0


@dataclass(frozen=True)
class SequenceLimitEstimate:
    value: float
    error_bound: float
    n_used: int
    method: str  # "direct" or "rate_extrapolated"


def _check_theta(theta):
    if not (-1.0 < theta < 0.0) or not math.isfinite(theta):
        raise DomainError(f"theta must lie in (-1, 0), got {theta!r}")


def _check_delta(delta):
    if not (0.0 < delta <= 1.0) or not math.isfinite(delta):
        raise DomainError(f"delta must lie in (0, 1], got {delta!r}")


def _b_terms(lo, hi, theta):
    j = np.arange(lo, hi, dtype=float)
    return j**theta


def _c_terms(lo, hi, delta):
    j = np.arange(lo, hi, dtype=float)
    return np.log(j) ** (delta - 1.0) / j


def _partial_sums(term_fn, first, checkpoints):
    """Exactly rounded partial sums ``sum_{j=first}^{n} term(j)`` at each checkpoint.

    Terms are accumulated in ascending blocks; each block is summed with
    ``math.fsum`` and the running total is kept as a list of block sums
    that is itself ``fsum``-reduced, so the result does not depend on
    how the range is cut into blocks.
    """
    out = []
    blocks = []
    pos = first
    for n in checkpoints:
        while pos <= n:
            hi = min(pos + _BLOCK, n + 1)
            blocks.append(math.fsum(term_fn(pos, hi)))
            pos = hi
        out.append(math.fsum(blocks))
    return out


def b_seq(n, theta):
    """``B_{n,theta}`` for ``n >= 1``."""
    _check_theta(theta)
    n = int(n)
    if n < 1:
        raise DomainError("n must be >= 1")
    if n > MAX_TERMS:
        raise BudgetExceededError(f"n={n} exceeds the {MAX_TERMS} term cap", cost=n)
    (s,) = _partial_sums(lambda lo, hi: _b_terms(lo, hi, theta), 1, [n])
    return s - n ** (theta + 1.0) / (theta + 1.0)


def c_seq(n, delta):
    """``C_{n,delta}`` for ``n >= 2`` (natural logs)."""
    _check_delta(delta)
    n = int(n)
    if n < 2:
        raise DomainError("n must be >= 2")
    if n > MAX_TERMS:
        raise BudgetExceededError(f"n={n} exceeds the {MAX_TERMS} term cap", cost=n)
    (s,) = _partial_sums(lambda lo, hi: _c_terms(lo, hi, delta), 2, [n])
    return s - math.log(n) ** delta / delta


def _extrapolate(values, ns, rate):
    """Fit ``limit + K1 r(n) + K2 r(n)/n`` through the last three ladder points."""
    rows = [[1.0, rate(n), rate(n) / n] for n in ns[-3:]]
    sol = np.linalg.solve(np.array(rows), np.array(values[-3:]))
    return float(sol[0])


def _limit(term_fn, first, correction, rate, tol, n0, label):
    if not (tol > 0) or not math.isfinite(tol):
        raise DomainError(f"tol must be positive, got {tol!r}")
    ns = []
    values = []
    blocks = []
    pos = first
    prev = None
    best = None
    n = n0
    while n <= MAX_TERMS:
        while pos <= n:
            hi = min(pos + _BLOCK, n + 1)
            blocks.append(math.fsum(term_fn(pos, hi)))
            pos = hi
        ns.append(n)
        values.append(math.fsum(blocks) - correction(n))
        if len(ns) >= 3:
            est = _extrapolate(values, ns, rate)
            if prev is not None:
                err = _SAFETY * abs(est - prev)
                cand = SequenceLimitEstimate(est, err, n, "rate_extrapolated")
                if best is None or err <= best.error_bound:
                    best = cand
                if err <= tol:
                    return cand
            prev = est
        n *= 2
    raise BudgetExceededError(
        f"{label}: tolerance {tol:g} not reached within {MAX_TERMS} terms",
        best=best,
        cost=MAX_TERMS,
    )


def b_limit(theta, tol=1e-8):
    """Limit ``B_theta`` of ``B_{n,theta}`` with ``error_bound <= tol``."""
    _check_theta(theta)
    return _limit(
        lambda lo, hi: _b_terms(lo, hi, theta),
        1,
        lambda n: n ** (theta + 1.0) / (theta + 1.0),
        lambda n: float(n) ** theta,
        tol,
        16,
        f"b_limit(theta={theta})",
    )


def c_limit(delta, tol=1e-8):
    """Limit ``C_delta`` of ``C_{n,delta}`` with ``error_bound <= tol``."""
    _check_delta(delta)
    return _limit(
        lambda lo, hi: _c_terms(lo, hi, delta),
        2,
        lambda n: math.log(n) ** delta / delta,
        lambda n: math.log(n) ** (delta - 1.0) / n,
        tol,
        16,
        f"c_limit(delta={delta})",
    )
