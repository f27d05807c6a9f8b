"""Fixed-budget pure exploration: SAR for m-best and multi-bandit
identification, with SR, uniform and Gap-E baselines."""

from .algorithms import (
    BudgetTooSmall,
    PhaseSchedule,
    SelectionResult,
    empirical_gaps,
    random_priority,
    run_gap_e,
    run_sar_m_best,
    run_sar_multibandit,
    run_sr_m_best,
    run_uniform,
    sar_schedule,
    sr_schedule,
)
from .complexity import (
    ComplexityReport,
    GapProfile,
    InfeasibleComplexity,
    bound_theorem1,
    bound_theorem2,
    complexity_m_best,
    complexity_multibandit,
    gaps_m_best,
    overline_log,
)
from .kernels import backend
from .model import (
    BanditInstance,
    Bernoulli,
    MultiBanditInstance,
    PointMass,
    PreconditionError,
    is_correct_multibandit,
    is_correct_selection,
    sample,
    true_means,
)
from .rng import RngStream
from .simulation import (
    EnumerationTooLarge,
    ErrorEstimate,
    StrategySpec,
    estimate_error,
    exact_error_enumeration,
    suggest_budget,
    sweep_over_m,
)

__version__ = "0.1.0"
