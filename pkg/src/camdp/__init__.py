"""Two-agent cooperative MDPs with factored state: evaluation, best-response
iteration, equilibrium analysis and policy-space reduction."""

from .equilibrium import (
    ConditionReport,
    EnumerationSizeError,
    ValueMatrix,
    check_conditions,
    check_dominance_condition,
    check_global_convergence,
    check_observability,
    check_response_exactness,
    dominance_counts,
    enumerate_sub_policies,
    enumerate_value_matrix,
    find_nash_equilibria,
)
from .evaluation import (
    StructureError,
    average_reward,
    check_quasi_positive,
    evaluate_exact,
    evaluate_iterative,
    relative_spread,
    scalar_value,
    stationary_distribution,
)
from .fixtures import CASE_STUDY_GAMMA, CASE_STUDY_INITIAL, load_fixture, case_study_model
from .generator import GenerationError, GeneratorSpec, random_camdp
from .model import (
    AugmentedDynamics,
    CamdpError,
    DimensionError,
    FactoredCamdp,
    JointPolicy,
    ModelError,
    augment,
    composite_index,
    decompose_index,
    load_model,
    save_model,
    validate,
)
from .policy import (
    IterationTrace,
    NonConvergenceError,
    PolicyCache,
    SolverConfig,
    alternate_iterate,
    best_response,
    best_response_run,
    epsilon_greedy_iterate,
    improve_agent,
    inner_step_stats,
    loss_bound,
    revised_improve,
    simultaneous_iterate,
)
from .reduction import (
    PolicyConstraint,
    ReductionReport,
    constrained_best,
    preset_constraint,
    prune_by_value,
    prune_from_traces,
    vacuous_constraint,
)

__version__ = "0.1.0"
