"""Incentive design by intervention under perfect monitoring."""

from .game_core import (
    DEFAULT_TOL,
    ActionGrid,
    AssumptionReport,
    BudgetExceededError,
    EquilibriumResult,
    ExtremeRule,
    InterventionError,
    InterventionGameModel,
    InterventionRule,
    OffGridError,
    RegionMask,
    SolverError,
    best_deviation_payoff,
    extreme_rule,
    induced_payoff,
    intervention_equilibrium,
    is_sustainable,
    sustainable_set,
    sustains,
    verify_assumption,
)

__version__ = "0.1.0"
