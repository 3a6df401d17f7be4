"""Catalog of zero-mean i.i.d. laws and a counter-based random stream.

Every catalog member has mean zero, a closed-form variance and a closed-form
``E|X|^q``.  Members are normalized to unit variance except ``two_point``,
which is parameterized by its atoms; all of them take an explicit ``scale``.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import DomainError, UnsupportedError
from .special import normal_abs_moment

__all__ = [
    "DistributionSpec",
    "RngStream",
    "CATALOG_KEYS",
    "get_distribution",
    "moment_metadata",
    "sample_partial_sum",
    "sample_partial_sums",
    "exact_sn_distribution",
    "lattice_law",
]

KINDS = ("standard_normal", "rademacher", "uniform_centered", "exponential_centered", "two_point")
LATTICE_KINDS = ("rademacher", "two_point")
EXACT_N_MAX = 30
_SQRT3 = math.sqrt(3.0)


def _exp_centered_abs_moment(q):
    # E|E - 1|^q for E ~ Exp(1): e^-1 (Gamma(q+1) + sum_k 1 / (k! (q+k+1))).
    series = math.fsum(1.0 / (math.factorial(k) * (q + k + 1.0)) for k in range(40))
    return math.exp(-1.0) * (math.gamma(q + 1.0) + series)


@dataclass(frozen=True)
class DistributionSpec:
    """An i.i.d. law for the summands ``X_k``.

    ``two_point`` puts mass ``prob`` on ``a`` and ``1 - prob`` on
    ``-a prob / (1 - prob)`` (before scaling), so the mean is zero.
    ``q`` is the moment order used by the rate results, in (2, 3].
    """

    kind: str
    scale: float = 1.0
    q: float = 3.0
    a: float = 1.0
    prob: float = 0.5
    log_moment_certificate: bool = field(default=True, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown distribution kind {self.kind!r}; choose from {KINDS}")
        if not (self.scale > 0) or not math.isfinite(self.scale):
            raise DomainError(f"scale must be positive, got {self.scale!r}")
        if not (2.0 < self.q <= 3.0):
            raise DomainError(f"q must lie in (2, 3], got {self.q!r}")
        if self.kind == "two_point":
            if not (0.0 < self.prob < 1.0):
                raise DomainError(f"prob must lie in (0, 1), got {self.prob!r}")
            if not (self.a > 0) or not math.isfinite(self.a):
                raise DomainError(f"a must be positive, got {self.a!r}")

    @property
    def atoms(self):
        """``(values, probabilities)`` of a single summand, for lattice kinds."""
        if self.kind == "rademacher":
            return np.array([-self.scale, self.scale]), np.array([0.5, 0.5])
        if self.kind == "two_point":
            b = -self.a * self.prob / (1.0 - self.prob)
            return self.scale * np.array([b, self.a]), np.array([1.0 - self.prob, self.prob])
        raise UnsupportedError(f"{self.kind} is not a lattice law")

    @property
    def variance(self):
        if self.kind == "two_point":
            return self.scale**2 * self.a**2 * self.prob / (1.0 - self.prob)
        return self.scale**2

    @property
    def sigma(self):
        return math.sqrt(self.variance)

    def abs_moment(self, q=None):
        """Closed-form ``E|X|^q`` (``q`` defaults to the law's own order)."""
        q = self.q if q is None else q
        s = self.scale**q
        if self.kind == "standard_normal":
            return s * normal_abs_moment(q)
        if self.kind == "rademacher":
            return s
        if self.kind == "uniform_centered":
            return s * _SQRT3**q / (q + 1.0)
        if self.kind == "exponential_centered":
            return s * _exp_centered_abs_moment(q)
        vals, probs = self.atoms
        return float(np.dot(probs, np.abs(vals) ** q))

    def sample(self, gen, size):
        """Draw ``size`` i.i.d. summands from a numpy ``Generator``."""
        if self.kind == "standard_normal":
            x = gen.standard_normal(size)
        elif self.kind == "rademacher":
            x = 2.0 * gen.integers(0, 2, size=size, dtype=np.int8) - 1.0
        elif self.kind == "uniform_centered":
            x = gen.uniform(-_SQRT3, _SQRT3, size)
        elif self.kind == "exponential_centered":
            x = gen.standard_exponential(size) - 1.0
        else:
            b = -self.a * self.prob / (1.0 - self.prob)
            x = np.where(gen.random(size) < self.prob, self.a, b)
        return self.scale * x


_ALIASES = {
    "normal": "standard_normal",
    "standard_normal": "standard_normal",
    "gaussian": "standard_normal",
    "rademacher": "rademacher",
    "uniform": "uniform_centered",
    "uniform_centered": "uniform_centered",
    "exponential": "exponential_centered",
    "exponential_centered": "exponential_centered",
    "two_point": "two_point",
}
CATALOG_KEYS = tuple(sorted(_ALIASES))


def get_distribution(key, scale=1.0, q=3.0):
    """Look up a catalog law by name.

    ``"two_point:a,prob"`` selects a two-point law with the given atom and
    probability, e.g. ``"two_point:1,0.2"``.
    """
    name, _, args = key.partition(":")
    kind = _ALIASES.get(name.strip().lower())
    if kind is None:
        raise DomainError(f"unknown distribution {key!r}; choose from {CATALOG_KEYS}")
    if kind == "two_point":
        a, prob = (1.0, 0.5)
        if args:
            try:
                a, prob = (float(v) for v in args.split(","))
            except ValueError as exc:
                raise DomainError(f"two_point expects 'two_point:a,prob', got {key!r}") from exc
        return DistributionSpec(kind, scale=scale, q=q, a=a, prob=prob)
    return DistributionSpec(kind, scale=scale, q=q)


def moment_metadata(dist):
    """``(sigma^2, q, E|X|^q)`` from the law's closed forms."""
    return dist.variance, dist.q, dist.abs_moment()


class RngStream:
    """Counter-based random stream keyed by ``(seed, stream_id)``.

    Backed by the Philox-4x64 generator: the 128-bit key is
    ``seed | stream_id << 64`` and ``counter`` is the starting block counter.
    Equal triples give equal output; distinct stream ids give independent
    streams, so shards of a simulation never overlap.
    """

    def __init__(self, seed, stream_id=0, counter=0):
        mask = (1 << 64) - 1
        if not (0 <= seed <= mask and 0 <= stream_id <= mask and 0 <= counter < 1 << 128):
            raise DomainError("seed and stream_id must be 64-bit, counter 128-bit, all >= 0")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self.counter = int(counter)
        ctr = [counter & mask, counter >> 64, 0, 0]
        bitgen = np.random.Philox(key=[self.seed, self.stream_id], counter=ctr)
        self.generator = np.random.Generator(bitgen)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, counter={self.counter})"

    def substream(self, stream_id):
        """A fresh stream with the same seed and a different id."""
        return RngStream(self.seed, stream_id, 0)


def _generator(rng):
    if isinstance(rng, RngStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError("rng must be an RngStream or numpy Generator")


def sample_partial_sum(dist, n, rng):
    """One draw of ``S_n``; consumes ``n`` summands from ``rng``."""
    if int(n) < 1:
        raise DomainError("n must be >= 1")
    return float(np.sum(dist.sample(_generator(rng), int(n))))


def sample_partial_sums(dist, n, reps, rng, chunk_elems=1 << 22):
    """``reps`` independent draws of ``S_n``, each built from ``n`` summands.

    Rows are drawn in consecutive chunks of about ``chunk_elems`` summands
    to bound memory; keep ``chunk_elems`` fixed for reproducible output.
    """
    n = int(n)
    reps = int(reps)
    if n < 1 or reps < 1:
        raise DomainError("n and reps must be >= 1")
    gen = _generator(rng)
    rows = max(1, chunk_elems // n)
    out = np.empty(reps)
    for start in range(0, reps, rows):
        stop = min(reps, start + rows)
        out[start:stop] = dist.sample(gen, (stop - start, n)).sum(axis=1)
    return out


def lattice_law(dist, n):
    """Exact law of ``S_n`` for a lattice kind, as sorted ``(values, probs)`` arrays."""
    if dist.kind not in LATTICE_KINDS:
        raise UnsupportedError(f"exact law of S_n is only available for {LATTICE_KINDS}")
    n = int(n)
    if n < 1:
        raise DomainError("n must be >= 1")
    (lo, hi), (_, p_hi) = dist.atoms
    k = np.arange(n + 1)
    values = k * hi + (n - k) * lo
    probs = stats.binom.pmf(k, n, p_hi)
    order = np.argsort(values, kind="stable")
    return values[order], probs[order]


def exact_sn_distribution(dist, n):
    """Full law of ``S_n`` as a list of ``(value, probability)`` pairs (lattice kinds, ``n <= 30``)."""
    if int(n) > EXACT_N_MAX:
        raise UnsupportedError(f"exact enumeration is limited to n <= {EXACT_N_MAX}")
    values, probs = lattice_law(dist, n)
    return [(float(v), float(w)) for v, w in zip(values, probs)]
