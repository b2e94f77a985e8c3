"""Adversarial bandits with noisy weighted side observations."""

__version__ = "0.1.0"

from .environment import (
    Environment,
    EnvironmentStep,
    LossSequence,
    NoiseModel,
    emit_feedback,
    gen_random_walk_losses,
)
from .errors import (
    BudgetExceededError,
    ConfigError,
    DegenerateGraphError,
    HorizonExceededError,
    ProtocolViolationError,
)
from .graphs import (
    AlphaStarResult,
    BinaryDigraph,
    ObservationGraph,
    effective_independence_number,
    gen_grid_geometric,
    gen_random_uniform,
    identity_graph,
    independence_number,
    q_upper_bound,
    threshold,
)
from .harness import (
    AggregateResult,
    RegretTrace,
    RunConfig,
    random_alpha_experiment,
    run_batch,
    run_episode,
    sweep_epsilon,
    theoretical_bound,
)
from .policies import (
    AdaptiveRates,
    Estimator,
    ExpWeightsPolicy,
    PolicyState,
    StaticRates,
    action_distribution,
    adaptive_rates,
    compute_q,
    estimate_basic,
    estimate_truncated,
    estimate_weighted,
    ixb_transform,
    make_policy,
)
