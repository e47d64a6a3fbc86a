"""Equilibrium solver and ban-the-box welfare analyzer for a hiring game with a noisy test."""

from .btb import (
    BtbComparison,
    MarketSolution,
    Regime,
    Scenario,
    ScenarioInconsistency,
    compare_btb,
    employer_btb_interval,
    solve_banned,
    solve_with_box,
)
from .model import (
    DEFAULT_EPS,
    MarketParams,
    PopulationParams,
    PotentialTypology,
    Signal,
    StrategyProfile,
    TestTypology,
    ValidationError,
    classify_potentials,
    classify_test,
    hiring_threshold,
    population_potential,
    posterior_mu,
    signal_distribution,
    stage_payoffs,
    validate,
)
from .oracle import (
    DeviationReport,
    GridCluster,
    MonteCarloEstimate,
    check_equilibrium,
    grid_search_equilibria,
    match_clusters,
    simulate_payoffs,
    verify_comparison,
)
from .solver import (
    Equilibrium,
    Kind,
    ParetoRankingError,
    PayoffTable,
    Posture,
    enumerate_equilibria,
    equilibrium_payoffs,
    pareto_select,
    profile_payoffs,
    solve_single,
)
from .sweep import Axis, SweepMode, SweepResult, SweepSpec, emit, read_records, run_sweep

__all__ = [name for name in dir() if not name.startswith("_")]
