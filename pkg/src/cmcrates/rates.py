"""Residuals of the precise-asymptotics limits, log-log rate fits, rate
verification reports and recovery of the second-order constants.

"Tends to zero" is checked on a finite, strictly decreasing grid of eps:

* lambda_1: the fitted slope of ``log|residual|`` against ``log eps`` must be
  at least ``(1 - gamma)(2 - p) - 0.1`` and the scaled residual
  ``eps^((gamma - 1)(2 - p)) residual`` must shrink in magnitude over the last
  three grid points.
* lambda_2: ``(log 1/eps)^-delta eps^-2delta residual`` must shrink in
  magnitude over the last three grid points and end below half its first
  magnitude.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .constants import b_limit, c_limit
from .errors import DomainError, InsufficientDataError, UnsupportedError
from .gaussian import (
    DEFAULT_TOL,
    klesov_sum_gaussian,
    lambda1_gaussian,
    lambda1_limit,
    lambda2_gaussian,
    lambda2_limit,
)
from .montecarlo import lambda1_mc, lambda2_mc
from .remainder import gamma_exponent
from .special import normal_abs_moment

__all__ = [
    "EpsGrid",
    "RateFit",
    "RateReport",
    "ConstantRecovery",
    "GaussianExact",
    "MonteCarloEvaluator",
    "lambda1_residual",
    "lambda2_residual",
    "fit_rate",
    "verify_theorem_2_2a",
    "verify_theorem_2_2b",
    "verify_he_xie_baseline",
    "recover_expansion_constants",
    "SLOPE_TOLERANCE",
]

SLOPE_TOLERANCE = 0.1
RESIDUAL_FLOOR = 1e-13


@dataclass(frozen=True)
class EpsGrid:
    """Strictly decreasing grid of positive eps values (at least 5)."""

    points: tuple

    def __post_init__(self):
        pts = tuple(float(e) for e in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 5:
            raise DomainError("an eps grid needs at least 5 points")
        if not all(e > 0 and math.isfinite(e) for e in pts):
            raise DomainError("eps grid points must be positive and finite")
        if any(b >= a for a, b in zip(pts, pts[1:])):
            raise DomainError("eps grid must be strictly decreasing")

    @classmethod
    def geometric(cls, start, ratio, count):
        if not (0.0 < ratio < 1.0):
            raise DomainError(f"ratio must lie in (0, 1), got {ratio!r}")
        return cls(tuple(start * ratio**k for k in range(int(count))))

    @classmethod
    def default_lambda1(cls):
        """0.2 down to 0.025 in steps of ``1/sqrt 2``."""
        return cls.geometric(0.2, 1.0 / math.sqrt(2.0), 7)

    @classmethod
    def default_lambda2(cls):
        """0.5 down to 0.05, seven geometric points."""
        return cls.geometric(0.5, 0.1 ** (1.0 / 6.0), 7)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @property
    def array(self):
        return np.array(self.points)


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    points_used: int


@dataclass(frozen=True)
class RateReport:
    theorem: str
    grid: tuple
    residuals: tuple
    scaled_sequence: tuple
    fit: RateFit
    required_slope: float | None
    passed: bool
    params: dict = field(default_factory=dict)

    @property
    def fitted_slope(self):
        return self.fit.slope


@dataclass(frozen=True)
class ConstantRecovery:
    constant_estimate: float
    reference: float
    relative_error: float
    reference_error_bound: float


class GaussianExact:
    """Exact series for normal summands with standard deviation ``sigma``."""

    name = "gaussian_exact"

    def __init__(self, sigma=1.0, tol=DEFAULT_TOL):
        self.sigma = float(sigma)
        self.tol = tol

    def lambda1(self, eps, p):
        return lambda1_gaussian(eps, p, sigma=self.sigma, tol=self.tol).value

    def lambda2(self, eps, delta):
        return lambda2_gaussian(eps, delta, sigma=self.sigma, tol=self.tol).value

    def __repr__(self):
        return f"GaussianExact(sigma={self.sigma})"


class MonteCarloEvaluator:
    """Truncated Monte Carlo series plus the Gaussian-proxy tail."""

    name = "mc"

    def __init__(self, dist, cfg):
        self.dist = dist
        self.cfg = cfg
        self.sigma = dist.sigma

    def lambda1(self, eps, p):
        return lambda1_mc(self.dist, p, eps, self.cfg).completed

    def lambda2(self, eps, delta):
        return lambda2_mc(self.dist, delta, eps, self.cfg).completed

    def __repr__(self):
        return f"MonteCarloEvaluator({self.dist.kind}, seed={self.cfg.seed})"


def _evaluator(evaluator):
    if evaluator is None or evaluator == "gaussian_exact":
        return GaussianExact()
    if isinstance(evaluator, str):
        raise DomainError(f"unknown evaluator {evaluator!r}")
    return evaluator


def _sigma(sigma, ev):
    if sigma is None:
        return ev.sigma
    if not math.isclose(sigma, ev.sigma, rel_tol=1e-12):
        raise DomainError(f"sigma={sigma} disagrees with the evaluator's sigma={ev.sigma}")
    return sigma


def lambda1_residual(eps, p, sigma=None, evaluator="gaussian_exact"):
    """``eps^(2-p) lambda_1(eps, p) - 2 sigma^2 / (2 - p)``."""
    ev = _evaluator(evaluator)
    s = _sigma(sigma, ev)
    return eps ** (2.0 - p) * ev.lambda1(eps, p) - lambda1_limit(p, s)


def lambda2_residual(eps, delta, sigma=None, evaluator="gaussian_exact"):
    """``eps^(2 delta) lambda_2(eps, delta) - sigma^(2 delta + 2) E|N|^(2 delta + 2) / delta``."""
    ev = _evaluator(evaluator)
    s = _sigma(sigma, ev)
    return eps ** (2.0 * delta) * ev.lambda2(eps, delta) - lambda2_limit(delta, s)


def fit_rate(grid, residuals, floor=RESIDUAL_FLOOR):
    """Least-squares line through ``(log eps, log|residual|)``.

    Points with ``|residual| < floor`` are dropped; fewer than three usable
    points raise :class:`InsufficientDataError`.
    """
    eps = np.asarray(grid.points if isinstance(grid, EpsGrid) else grid, dtype=float)
    res = np.asarray(residuals, dtype=float)
    if eps.shape != res.shape:
        raise DomainError("grid and residuals must have the same length")
    keep = np.isfinite(res) & (np.abs(res) >= floor)
    if keep.sum() < 3:
        raise InsufficientDataError(f"only {int(keep.sum())} usable points; need 3")
    x = np.log(eps[keep])
    y = np.log(np.abs(res[keep]))
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum((y - fitted) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return RateFit(float(slope), float(intercept), r2, int(keep.sum()))


def _map(fn, points, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, points))
    return [fn(e) for e in points]


def _shrinking_tail(seq, k=3):
    mags = np.abs(np.asarray(seq[-k:], dtype=float))
    return bool(np.all(np.diff(mags) < 0))


def verify_theorem_2_2a(p, q, grid=None, evaluator="gaussian_exact", inject_bias=None, workers=1):
    """Rate check for ``eps^(2-p) lambda_1 - 2 sigma^2 / (2-p) = o(eps^((1-gamma)(2-p)))``.

    ``inject_bias(eps)`` is added to each residual (negative controls).
    """
    exps = gamma_exponent(p, q)
    grid = grid or EpsGrid.default_lambda1()
    ev = _evaluator(evaluator)
    res = np.array(_map(lambda e: lambda1_residual(e, p, evaluator=ev), grid.points, workers))
    if inject_bias is not None:
        res = res + np.array([inject_bias(e) for e in grid.points])
    required = exps.lambda1_rate
    scaled = grid.array ** (-required) * res
    fit = fit_rate(grid, res)
    passed = fit.slope >= required - SLOPE_TOLERANCE and _shrinking_tail(scaled)
    return RateReport(
        "2.2a",
        grid.points,
        tuple(res.tolist()),
        tuple(scaled.tolist()),
        fit,
        required,
        bool(passed),
        {"p": p, "q": q, "gamma": exps.gamma, "evaluator": repr(ev)},
    )


def verify_theorem_2_2b(delta, q, grid=None, evaluator="gaussian_exact", inject_bias=None, workers=1):
    """Rate check for ``eps^(2 delta) lambda_2 - limit = o(eps^(2 delta) (log 1/eps)^delta)``.

    The fit is reported for reference only; ``passed`` depends on the scaled
    sequence alone.
    """
    if not (2.0 < q <= 3.0):
        raise DomainError(f"q must lie in (2, 3], got {q!r}")
    grid = grid or EpsGrid.default_lambda2()
    if grid.points[0] >= 1.0:
        raise DomainError("lambda_2 grids must lie below 1 so that log(1/eps) > 0")
    ev = _evaluator(evaluator)
    res = np.array(_map(lambda e: lambda2_residual(e, delta, evaluator=ev), grid.points, workers))
    if inject_bias is not None:
        res = res + np.array([inject_bias(e) for e in grid.points])
    e = grid.array
    scaled = np.log(1.0 / e) ** (-delta) * e ** (-2.0 * delta) * res
    fit = fit_rate(grid, res)
    passed = _shrinking_tail(scaled) and abs(scaled[-1]) < abs(scaled[0]) / 2.0
    return RateReport(
        "2.2b",
        grid.points,
        tuple(res.tolist()),
        tuple(scaled.tolist()),
        fit,
        None,
        bool(passed),
        {"delta": delta, "q": q, "evaluator": repr(ev)},
    )


def verify_he_xie_baseline(q=3.0, grid=None, sigma=1.0, workers=1):
    """Gaussian baseline: ``eps^2 sum_n P(|S_n| >= eps n) - sigma^2`` decays with slope >= q - 2."""
    if not (2.0 < q <= 3.0):
        raise DomainError(f"q must lie in (2, 3], got {q!r}")
    grid = grid or EpsGrid.default_lambda1()
    res = np.array(
        _map(lambda e: e * e * klesov_sum_gaussian(e, sigma=sigma).value - sigma**2, grid.points, workers)
    )
    fit = fit_rate(grid, res)
    scaled = grid.array ** (-(q - 2.0)) * res
    passed = fit.slope >= q - 2.0 and _shrinking_tail(scaled)
    return RateReport(
        "he_xie", grid.points, tuple(res.tolist()), tuple(scaled.tolist()), fit, q - 2.0, bool(passed), {"q": q}
    )


def _richardson(e1, k1, e2, k2, rate):
    w1 = e1**rate
    w2 = e2**rate
    return (k2 * w1 - k1 * w2) / (w1 - w2)


def recover_expansion_constants(p=None, delta=None, grid=None, evaluator="gaussian_exact"):
    """Second-order constant of the Gaussian expansion by two-point Richardson.

    For lambda_1 the normalized residual ``residual / eps^(2-p)`` equals
    ``B_{-p/2} E|N|^p sigma^p + O(eps^(p+1))``; for lambda_2,
    ``residual / eps^(2 delta) = C_delta sigma^2 + O(eps^3)``.  The last two
    grid points are combined to cancel the leading correction.
    """
    if (p is None) == (delta is None):
        raise DomainError("give exactly one of p or delta")
    ev = _evaluator(evaluator)
    if not isinstance(ev, GaussianExact):
        raise UnsupportedError("constant recovery needs the exact Gaussian evaluator")
    s = ev.sigma
    if p is not None:
        grid = grid or EpsGrid.default_lambda1()
        e1, e2 = grid.points[-2:]
        k1 = lambda1_residual(e1, p, evaluator=ev) / e1 ** (2.0 - p)
        k2 = lambda1_residual(e2, p, evaluator=ev) / e2 ** (2.0 - p)
        est = _richardson(e1, k1, e2, k2, p + 1.0)
        lim = b_limit(-p / 2.0)
        ref = lim.value * normal_abs_moment(p) * s**p
        ref_err = lim.error_bound * normal_abs_moment(p) * s**p
    else:
        grid = grid or EpsGrid.default_lambda2()
        e1, e2 = grid.points[-2:]
        k1 = lambda2_residual(e1, delta, evaluator=ev) / e1 ** (2.0 * delta)
        k2 = lambda2_residual(e2, delta, evaluator=ev) / e2 ** (2.0 * delta)
        est = _richardson(e1, k1, e2, k2, 3.0)
        lim = c_limit(delta)
        ref = lim.value * s**2
        ref_err = lim.error_bound * s**2
    return ConstantRecovery(est, ref, abs(est - ref) / abs(ref), ref_err)
