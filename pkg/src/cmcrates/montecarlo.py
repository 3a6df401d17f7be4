"""Monte Carlo estimates of tail probabilities, truncated moments and truncated
lambda series for general i.i.d. summands.

Each ``n`` gets its own pool of simulated partial sums, split into shards of
``cfg.batch`` replications.  Shard ``i`` at size ``n`` draws from the stream
``RngStream(cfg.seed, n << 32 | i)``, so the pool depends only on
``(seed, n, replications, batch)`` and not on the number of workers.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .distributions import EXACT_N_MAX, LATTICE_KINDS, RngStream, lattice_law, sample_partial_sums
from .errors import BudgetExceededError, DomainError
from .gaussian import lambda1_gaussian, lambda1_terms, lambda2_gaussian, lambda2_terms
from .special import normal_tail

__all__ = [
    "MCConfig",
    "MCEstimate",
    "simulate_partial_sums",
    "estimate_tail_prob",
    "estimate_truncated_pth_moment",
    "lambda1_mc",
    "lambda2_mc",
    "delta_n_estimate",
    "exceedance_curve",
    "DEFAULT_T_GRID",
]

DEFAULT_T_GRID = np.round(np.linspace(0.0, 5.0, 501), 12)


@dataclass(frozen=True)
class MCConfig:
    replications: int = 100_000
    seed: int = 20240607
    n_max: int = 50
    batch: int = 25_000
    budget: int = 4 * 10**9
    workers: int = 1

    def __post_init__(self):
        if self.replications < 100:
            raise DomainError("replications must be >= 100")
        if self.n_max < 1 or self.batch < 1 or self.workers < 1:
            raise DomainError("n_max, batch and workers must be >= 1")
        if not (0 <= self.seed < 1 << 64):
            raise DomainError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class MCEstimate:
    """Monte Carlo mean with ``stderr = sd / sqrt(replications)``.

    For truncated lambda series, ``truncation_bias`` is the Gaussian-proxy
    value of the omitted terms ``n > n_max`` (exact for normal summands,
    heuristic otherwise) and ``completed`` adds it back.
    """

    mean: float
    stderr: float
    replications: int
    seed: int
    truncation_bias: float = 0.0

    @property
    def completed(self):
        return self.mean + self.truncation_bias


def _check_budget(cost, cfg, label):
    if cost > cfg.budget:
        raise BudgetExceededError(
            f"{label} needs {cost:.3g} summand draws, over the budget of {cfg.budget:.3g}",
            cost=cost,
        )


def simulate_partial_sums(dist, n, cfg):
    """``cfg.replications`` draws of ``S_n`` in shard order."""
    n = int(n)
    if n < 1:
        raise DomainError("n must be >= 1")
    if n >= 1 << 32:
        raise DomainError("n must fit in 32 bits")
    _check_budget(n * cfg.replications, cfg, f"S_{n} simulation")
    shards = []
    for i, start in enumerate(range(0, cfg.replications, cfg.batch)):
        shards.append((i, min(cfg.batch, cfg.replications - start)))

    def run(shard):
        i, size = shard
        return sample_partial_sums(dist, n, size, RngStream(cfg.seed, (n << 32) | i))

    if cfg.workers > 1 and len(shards) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(run, shards))
    else:
        parts = [run(s) for s in shards]
    return np.concatenate(parts)


def _estimate(values, cfg):
    values = np.asarray(values, dtype=float)
    r = values.size
    mean = math.fsum(values) / r
    sd = float(np.std(values, ddof=1)) if r > 1 else 0.0
    return MCEstimate(mean, sd / math.sqrt(r), r, cfg.seed)


def estimate_tail_prob(dist, n, x, cfg):
    """Frequency estimate of ``P(|S_n| >= x)``."""
    if not (x >= 0):
        raise DomainError("x must be >= 0")
    s = simulate_partial_sums(dist, n, cfg)
    return _estimate(np.abs(s) >= x, cfg)


def estimate_truncated_pth_moment(dist, n, threshold, p, cfg):
    """Sample mean of ``|S_n|^p I{|S_n| >= threshold}``."""
    if not (threshold >= 0):
        raise DomainError("threshold must be >= 0")
    if not (0.0 < p <= 2.0):
        raise DomainError(f"p must lie in (0, 2], got {p!r}")
    a = np.abs(simulate_partial_sums(dist, n, cfg))
    return _estimate(np.where(a >= threshold, a**p, 0.0), cfg)


def _series_mc(dist, ns, weights, thresholds, p, cfg, label):
    _check_budget(cfg.replications * int(np.sum(ns)), cfg, label)
    means = []
    variances = []
    for n, w, c in zip(ns, weights, thresholds):
        est = estimate_truncated_pth_moment(dist, int(n), c, p, cfg)
        means.append(w * est.mean)
        variances.append((w * est.stderr) ** 2)
    return math.fsum(means), math.sqrt(math.fsum(variances))


def lambda1_mc(dist, p, eps, cfg, tol=1e-9):
    """``sum_{n <= n_max} n^-p E[|S_n|^p I{|S_n| >= eps n}]`` by simulation.

    The omitted tail ``n > n_max`` is reported as ``truncation_bias`` from
    the Gaussian series with the same variance.
    """
    if not (0.0 < p < 2.0):
        raise DomainError(f"p must lie in (0, 2), got {p!r}")
    if not (eps >= 0.05):
        raise DomainError(f"lambda1_mc needs eps >= 0.05, got {eps!r}")
    ns = np.arange(1, cfg.n_max + 1)
    mean, se = _series_mc(dist, ns, ns ** (-float(p)), eps * ns, p, cfg, "lambda1_mc")
    sigma = dist.sigma
    full = lambda1_gaussian(eps, p, sigma=sigma, tol=tol).value
    head = math.fsum(lambda1_terms(ns, eps, p, sigma))
    return MCEstimate(mean, se, cfg.replications, cfg.seed, max(full - head, 0.0))


def lambda2_mc(dist, delta, eps, cfg, tol=1e-9):
    """``sum_{2 <= n <= n_max} (log n)^(delta-1)/n^2 E[S_n^2 I{|S_n| >= eps sqrt(n log n)}]``."""
    if not (0.0 < delta <= 1.0):
        raise DomainError(f"delta must lie in (0, 1], got {delta!r}")
    if not (eps >= 0.05):
        raise DomainError(f"lambda2_mc needs eps >= 0.05, got {eps!r}")
    if cfg.n_max < 2:
        raise DomainError("lambda2_mc needs n_max >= 2")
    ns = np.arange(2, cfg.n_max + 1)
    ln = np.log(ns)
    weights = ln ** (delta - 1.0) / ns**2
    mean, se = _series_mc(dist, ns, weights, eps * np.sqrt(ns * ln), 2.0, cfg, "lambda2_mc")
    sigma = dist.sigma
    full = lambda2_gaussian(eps, delta, sigma=sigma, tol=tol).value
    head = math.fsum(lambda2_terms(ns, eps, delta, sigma))
    return MCEstimate(mean, se, cfg.replications, cfg.seed, max(full - head, 0.0))


def exceedance_curve(dist, n, cfg, t_grid=DEFAULT_T_GRID):
    """``P(|S_n| >= sqrt(n) t)`` on ``t_grid``: exact for lattice laws with
    ``n <= 30``, otherwise the empirical frequency.  Returns ``(curve, exact)``."""
    t = np.asarray(t_grid, dtype=float)
    x = math.sqrt(n) * t
    if dist.kind in LATTICE_KINDS and n <= EXACT_N_MAX:
        values, probs = lattice_law(dist, n)
        a = np.abs(values)
        # Atoms sitting exactly on a grid point count as exceedances despite rounding.
        hit = a[None, :] >= x[:, None] * (1.0 - 1e-12)
        return hit.astype(float) @ probs, True
    a = np.sort(np.abs(simulate_partial_sums(dist, n, cfg)))
    below = np.searchsorted(a, x, side="left")
    return 1.0 - below / a.size, False


def delta_n_estimate(dist, n, cfg, t_grid=DEFAULT_T_GRID):
    """``max_t |P(|S_n| >= sqrt(n) t) - Phi(t)|`` over a fixed ascending grid."""
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0):
        raise DomainError("t_grid must be a strictly ascending 1-d grid")
    if t[0] > 0 or t[-1] < 5 or np.max(np.diff(t)) > 0.01 + 1e-12:
        raise DomainError("t_grid must span [0, 5] with step <= 0.01")
    curve, _ = exceedance_curve(dist, int(n), cfg, t)
    return float(np.max(np.abs(curve - normal_tail(t))))
