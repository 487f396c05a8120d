"""Exact stopping solution by backward induction.

The state is (junction, rounds flown there, junction value); the drone being
intact is implicit (the expected remaining gain of a crashed drone is zero).
Values are expected remaining Taler beyond what is already banked plus the
current junction value, so the value at the very first state is the expected
mission total. All arithmetic is exact rational arithmetic: probabilities are
taken as the exact values of the configured floats, which are dyadic, so
denominators stay small and the Bellman residual is identically zero.

Ties between flying and stopping break toward stopping (the risk-free arm).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .config import MissionConfig
from .errors import DomainError
from .mission import FlightOutcome
from .policies import CLOSED, ContextPolicy, DecisionContext, closed_loop_decide


@dataclass(frozen=True)
class DpTable:
    """Solved value and action tables, keyed by (junction, rounds_flown, sigma)."""

    config: MissionConfig
    values: dict
    actions: dict

    def value(self, junction: int, rounds_flown: int, sigma, intact: bool = True) -> Fraction:
        """Expected remaining gain (excluding info already gathered)."""
        if not intact:
            return Fraction(0)
        key = (junction, rounds_flown, sigma)
        if key not in self.values:
            raise DomainError(f"state {key} is outside the solved table")
        return self.values[key]

    def action(self, junction: int, rounds_flown: int, sigma) -> bool:
        key = (junction, rounds_flown, sigma)
        if key not in self.actions:
            raise DomainError(f"state {key} is outside the solved table")
        return self.actions[key]

    @property
    def expected_mission_value(self) -> Fraction:
        start = self.config.rho.ladder[0]
        return self.values[(1, 0, start)]


def _fly_value(
    cfg: MissionConfig,
    values: dict,
    j: int,
    i: int,
    sigma,
    p: Fraction,
    r: Fraction,
) -> Fraction:
    if i == 0:
        branches = [(cfg.rho.next_value(sigma), Fraction(1))]
    else:
        branches = [(cfg.rho.next_value(sigma), p), (sigma, 1 - p)]
    total = Fraction(0)
    for sigma_next, q in branches:
        if q == 0:
            continue
        gain = Fraction(sigma_next - sigma)
        total += q * (gain + (1 - r) * values[(j, i + 1, sigma_next)])
    return total


def solve_dp(cfg: MissionConfig) -> DpTable:
    """Solve the full mission by backward induction over junctions and rounds."""
    p = cfg.increase_prob_exact
    r = cfg.crash_prob_exact
    drone = Fraction(cfg.drone_value)
    ladder = cfg.rho.ladder
    top = cfg.rho.top

    values: dict = {}
    actions: dict = {}
    next_junction_value = drone  # stopping at the last junction sells the drone
    for j in range(cfg.num_junctions, 0, -1):
        stop_value = next_junction_value
        for i in range(cfg.max_rounds, -1, -1):
            for sigma in ladder:
                key = (j, i, sigma)
                if i < cfg.max_rounds and sigma != top:
                    fly_value = _fly_value(cfg, values, j, i, sigma, p, r)
                    fly = fly_value > stop_value
                    values[key] = fly_value if fly else stop_value
                    actions[key] = fly
                else:
                    values[key] = stop_value
                    actions[key] = False
        next_junction_value = values[(j, 0, ladder[0])]
    return DpTable(config=cfg, values=values, actions=actions)


def bellman_residual(table: DpTable) -> Fraction:
    """Largest absolute self-consistency error of the solved table; exactly
    zero for a correct solve."""
    cfg = table.config
    p = cfg.increase_prob_exact
    r = cfg.crash_prob_exact
    drone = Fraction(cfg.drone_value)
    worst = Fraction(0)
    for j in range(cfg.num_junctions, 0, -1):
        stop_value = drone if j == cfg.num_junctions else table.values[(j + 1, 0, cfg.rho.ladder[0])]
        for i in range(cfg.max_rounds, -1, -1):
            for sigma in cfg.rho.ladder:
                if i < cfg.max_rounds and sigma != cfg.rho.top:
                    best = max(stop_value, _fly_value(cfg, table.values, j, i, sigma, p, r))
                else:
                    best = stop_value
                residual = abs(best - table.values[(j, i, sigma)])
                worst = max(worst, residual)
    return worst


def dp_decide(table: DpTable, ctx: DecisionContext) -> bool:
    """Look up the solved action; a crashed drone always stops."""
    if not ctx.intact:
        return False
    if ctx.sigma is None:
        raise DomainError("the exact rule needs the junction value")
    return table.action(ctx.junction, ctx.rounds_flown, ctx.sigma)


class DpPolicy(ContextPolicy):
    """Policy wrapper over a solved table."""

    treatment = CLOSED

    def __init__(self, table: DpTable):
        self.table = table

    @classmethod
    def solve(cls, cfg: MissionConfig) -> "DpPolicy":
        return cls(solve_dp(cfg))

    def decide(self, ctx: DecisionContext) -> bool:
        return dp_decide(self.table, ctx)

    def decision_fn(self, cfg: MissionConfig) -> Callable[[int, int, int], bool]:
        if cfg != self.table.config:
            raise DomainError("table was solved for a different configuration")
        actions = self.table.actions
        return lambda j, i, sigma: actions[(j, i, sigma)]

    def __repr__(self) -> str:
        return "DpPolicy()"


def reachable_states(cfg: MissionConfig):
    """Decision states that can actually occur: the junction start, or at
    least one successful picture and no more successes than rounds flown."""
    for j in range(1, cfg.num_junctions + 1):
        for i in range(cfg.max_rounds + 1):
            for sigma in cfg.rho.ladder:
                hits = cfg.rho.index(sigma)
                if i == 0:
                    reachable = hits == 0
                else:
                    reachable = 1 <= hits <= i
                if reachable:
                    yield j, i, sigma


def disagreements_with_heuristic(table: DpTable) -> list[dict]:
    """Reachable decision states where the exact rule and the feedback
    threshold rule choose differently."""
    cfg = table.config
    rows = []
    for j, i, sigma in reachable_states(cfg):
        if i >= cfg.max_rounds or sigma == cfg.rho.top:
            continue
        ctx = DecisionContext(j, i, sigma, intact=True, feedback_available=True)
        heuristic = closed_loop_decide(ctx, cfg)
        exact = table.action(j, i, sigma)
        if heuristic != exact:
            rows.append(
                {
                    "junction": j,
                    "rounds_flown": i,
                    "sigma": sigma,
                    "dp_action": "fly" if exact else "stop",
                    "heuristic_action": "fly" if heuristic else "stop",
                }
            )
    return rows


def export_table(table: DpTable, reachable_only: bool = True) -> str:
    """Plain tabular dump: one line per state with value and action."""
    cfg = table.config
    lines = ["junction\tround\tsigma\tvalue\taction"]
    if reachable_only:
        states = list(reachable_states(cfg))
    else:
        states = [
            (j, i, sigma)
            for j in range(1, cfg.num_junctions + 1)
            for i in range(cfg.max_rounds + 1)
            for sigma in cfg.rho.ladder
        ]
    for j, i, sigma in states:
        value = float(table.values[(j, i, sigma)])
        action = "fly" if table.actions[(j, i, sigma)] else "stop"
        lines.append(f"{j}\t{i}\t{sigma}\t{value:.6f}\t{action}")
    return "\n".join(lines) + "\n"
