"""Numerical companion for precise asymptotics of complete moment convergence.

Exact Gaussian series for the truncated-moment sums ``lambda_1`` and
``lambda_2``, the second-order constants ``B_theta`` and ``C_delta``,
Monte Carlo estimators for general i.i.d. summands, the Berry-Esseen type
remainder bounds and log-log rate verification.
"""

__version__ = "0.1.0"

from .constants import SequenceLimitEstimate, b_limit, b_seq, c_limit, c_seq
from .distributions import (
    DistributionSpec,
    RngStream,
    exact_sn_distribution,
    get_distribution,
    lattice_law,
    moment_metadata,
    sample_partial_sum,
    sample_partial_sums,
)
from .errors import BudgetExceededError, DomainError, InsufficientDataError, UnsupportedError
from .gaussian import (
    SeriesValue,
    klesov_sum_gaussian,
    log_tail_sum_gaussian,
    lambda1_gaussian,
    lambda1_limit,
    lambda1_parts_gaussian,
    lambda2_gaussian,
    lambda2_limit,
    lambda2_parts_gaussian,
)
from .montecarlo import (
    MCConfig,
    MCEstimate,
    delta_n_estimate,
    estimate_tail_prob,
    estimate_truncated_pth_moment,
    lambda1_mc,
    lambda2_mc,
)
from .rates import (
    EpsGrid,
    GaussianExact,
    MonteCarloEvaluator,
    RateFit,
    fit_rate,
    lambda1_residual,
    lambda2_residual,
    recover_expansion_constants,
    verify_he_xie_baseline,
    verify_theorem_2_2a,
    verify_theorem_2_2b,
)
from .remainder import (
    BoundReport,
    RateExponents,
    bikjalis_bound,
    fit_bikjalis_constant,
    gamma_exponent,
    h1,
    h2,
    remainder_direct_mc,
    remainder_tail_bound_lambda1,
    remainder_tail_bound_lambda2,
)
from .special import (
    normal_abs_moment,
    normal_density,
    normal_tail,
    normal_tail_inverse,
    truncated_abs_moment,
)
