"""Pool-size planning and protocol simulation for single, double and k-round group testing."""

from .cost_model import (
    double_pool_cost,
    double_pool_cost_derivative,
    k_pool_cost,
    k_pool_cost_derivative,
    single_pool_cost,
    single_pool_cost_derivative,
)
from .errors import (
    DomainError,
    NoInteriorOptimumError,
    NotAttainedError,
    PoolingError,
    RangeError,
)
from .kernels import BACKEND
from .optimizer import (
    PoolPlan,
    SearchBounds,
    continuous_optimum_s1,
    continuous_optimum_sk,
    find_p_for_continuous_s1,
    find_savings_crossover,
    integer_optimum,
    lambert_w0,
    pooling_breakeven,
    savings_percent,
)
from .simulator import (
    Bernoulli,
    FixedCount,
    SimConfig,
    SimReport,
    TrialOutcome,
    estimate_correlation_penalty,
    run_simulation,
    run_trial,
    sensitivity_report,
)

__version__ = "0.1.0"
