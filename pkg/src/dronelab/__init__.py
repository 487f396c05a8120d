"""Drone-surveillance stopping game: exact dynamics and policies, synthetic
bias agents, a live experiment service, and the behavioral analysis pipeline."""

from .config import MissionConfig, RhoLadder
from .mission import (
    FlightOutcome,
    JunctionRecord,
    MissionLog,
    MissionState,
    fly_once,
    mission_value,
    stop_junction,
)
from .payoff import payoff_euro
from .policies import (
    DecisionContext,
    closed_loop_decide,
    marginal_gain,
    myopic_threshold,
    open_loop_heuristic_plan,
)
from .dp import DpPolicy, DpTable, dp_decide, solve_dp
from .evaluate import PolicyStats, evaluate_policy_exact, simulate_missions
from .agents import BiasProfile, PopulationSpec, generate_sessions, make_policy

__version__ = "0.1.0"

__all__ = [
    "BiasProfile",
    "DecisionContext",
    "DpPolicy",
    "DpTable",
    "FlightOutcome",
    "JunctionRecord",
    "MissionConfig",
    "MissionLog",
    "MissionState",
    "PolicyStats",
    "PopulationSpec",
    "RhoLadder",
    "closed_loop_decide",
    "dp_decide",
    "evaluate_policy_exact",
    "fly_once",
    "generate_sessions",
    "make_policy",
    "marginal_gain",
    "mission_value",
    "myopic_threshold",
    "open_loop_heuristic_plan",
    "payoff_euro",
    "simulate_missions",
    "solve_dp",
    "stop_junction",
]
