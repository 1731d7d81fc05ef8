"""Inclusion-process stationary law vs the Poisson-Dirichlet limit:
exact oracles, event-driven simulation, and quantitative error-bound
verification."""

from .bounds import (
    BoundBreakdown,
    moment_error_bound,
    partition_tv_bound,
    stein_factors,
)
from .dirichlet import (
    GemSample,
    PartitionDistribution,
    crp_sample,
    crp_shape_counts,
    dp_moment_partition_sum,
    esf_distribution,
    sample_dp,
    sample_gem,
    tv_distance,
)
from .dual import (
    DualChainLaw,
    DualFunctionState,
    SteinSolution,
    dp_moment_dual,
    eval_fh,
    fh_derivative,
    mean_holding_time,
    stein_residual,
)
from .harness import (
    ConfigError,
    ExperimentConfig,
    ResultRecord,
    run_moment_compare,
    run_partition_tv,
    run_simulation,
    run_sweep,
)
from .inclusion import (
    EnumerationTooLargeError,
    FenwickTree,
    InclusionModel,
    InclusionSimulator,
    empirical_moment,
    enumerate_stationary,
    exact_moment,
    exact_partition_distribution_W,
    jump_rate,
    measure_from_counts,
    sample_partition_from_W,
    sample_stationary_exact,
    sample_stationary_mcmc,
    simulate,
    stationary_log_weight,
    total_jump_rate,
)
from .measures import (
    AtomicMeasure,
    PolyFactor,
    ProductTestFunction,
    eval_moment,
    integrate_uniform,
    sup_norm_bound,
)
from .seeding import make_rng, mix_seed, splitmix64

__version__ = "0.1.0"
