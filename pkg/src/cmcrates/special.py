"""Scalar functions of the standard normal law.

All functions accept scalars or numpy arrays and broadcast.  ``normal_tail``
is the two-sided tail ``P(|N| >= x)``, written ``Phi`` in comments.
"""

import math

import numpy as np
from scipy import integrate, special

from .errors import DomainError

__all__ = [
    "normal_tail",
    "normal_density",
    "normal_abs_moment",
    "truncated_abs_moment",
    "truncated_abs_moment_quad",
    "normal_tail_inverse",
]

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)


def _check_nonneg(name, x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError(f"{name} must be finite and >= 0, got {x!r}")
    return arr


def _unwrap(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def normal_tail(x):
    """Two-sided standard normal tail ``P(|N| >= x)`` for ``x >= 0``.

    Evaluated as ``erfc(x / sqrt(2))``, so there is no cancellation in the
    far tail.
    """
    arr = _check_nonneg("x", x)
    return _unwrap(special.erfc(arr / _SQRT2))


def normal_density(x):
    """Standard normal density."""
    arr = np.asarray(x, dtype=float)
    return _unwrap(np.exp(-0.5 * arr * arr) / _SQRT2PI)


def normal_tail_inverse(prob):
    """Solve ``normal_tail(t) = prob`` for ``t >= 0``, ``prob`` in (0, 1]."""
    arr = np.asarray(prob, dtype=float)
    if np.any(arr <= 0) or np.any(arr > 1):
        raise DomainError(f"prob must lie in (0, 1], got {prob!r}")
    return _unwrap(_SQRT2 * special.erfcinv(arr))


def normal_abs_moment(p):
    """``E|N|^p = 2^(p/2) Gamma((p+1)/2) / sqrt(pi)``."""
    arr = _check_nonneg("p", p)
    val = np.exp(0.5 * arr * math.log(2.0) + special.gammaln(0.5 * (arr + 1.0))
                 - 0.5 * math.log(math.pi))
    return _unwrap(val)


def truncated_abs_moment_quad(p, a):
    """Quadrature reference for ``E[|N|^p I{|N| >= a}]`` (scalar only)."""
    p = float(p)
    a = float(a)
    if p < 0 or a < 0:
        raise DomainError("p and a must be >= 0")
    f = lambda t: 2.0 * t**p * math.exp(-0.5 * t * t) / _SQRT2PI
    val, _ = integrate.quad(f, a, np.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    return val


def truncated_abs_moment(p, a):
    """Truncated absolute moment ``m_p(a) = E[|N|^p I{|N| >= a}]``.

    Uses ``m_p(a) = E|N|^p * Q((p+1)/2, a^2/2)`` with ``Q`` the regularized
    upper incomplete gamma function.  ``p = 0`` reduces to the tail itself;
    entries where the gamma route returns a non-finite value fall back to
    quadrature.
    """
    p_arr = _check_nonneg("p", p)
    a_arr = _check_nonneg("a", a)
    p_b, a_b = np.broadcast_arrays(p_arr, a_arr)
    shape = p_b.shape
    p_b = p_b.ravel()
    a_b = a_b.ravel()
    out = normal_abs_moment(p_b) * special.gammaincc(0.5 * (p_b + 1.0), 0.5 * a_b * a_b)
    out = np.where(p_b == 0, special.erfc(a_b / _SQRT2), out)
    for i in np.flatnonzero(~np.isfinite(out)):
        out[i] = truncated_abs_moment_quad(p_b[i], a_b[i])
    return _unwrap(out.reshape(shape))
