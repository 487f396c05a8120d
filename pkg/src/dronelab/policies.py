"""Decision rules and mission runners.

The myopic rule compares the expected gain of one more picture against the
expected loss of the drone. With feedback available (closed loop) this yields
a threshold rule: keep flying until the junction's value reaches the first
ladder point whose one-round gain is no longer positive. Without feedback
(open loop) the corresponding rule of thumb is a fixed number of rounds per
junction, chosen to reach that threshold in expectation.

A policy is an object with a ``treatment`` tag and a ``decide`` method; pure
context-only policies additionally expose ``decision_fn`` so they can be
evaluated exactly and simulated in vectorized form.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Protocol, runtime_checkable

from .config import MissionConfig
from .errors import DomainError, ProtocolError
from .mission import (
    FlightOutcome,
    JunctionRecord,
    MissionLog,
    MissionState,
    final_value,
    fly_once,
    stop_junction,
)

CLOSED = "closed"
OPEN = "open"
TREATMENTS = (CLOSED, OPEN)


@dataclass(frozen=True)
class DecisionContext:
    """What a decision maker may observe before choosing fly or stop.

    In the open-loop treatment the junction value is masked (``sigma is
    None``) because no feedback is transmitted.
    """

    junction: int
    rounds_flown: int
    sigma: int | None
    intact: bool
    feedback_available: bool


def marginal_gain(sigma: int, cfg: MissionConfig, round_one_certain: bool = False) -> float:
    """Expected one-round payoff change at junction value ``sigma``:
    increase probability times the next increment, minus the expected drone loss.

    ``round_one_certain`` prices the very first picture of a junction, which
    succeeds with probability one instead of ``increase_prob``.
    """
    if sigma == cfg.rho.top:
        raise DomainError(f"no further round has any gain at {sigma}")
    increment = cfg.rho.increment(sigma)
    p = 1.0 if round_one_certain else cfg.increase_prob
    return p * increment - cfg.drone_value * cfg.crash_prob


def myopic_threshold(cfg: MissionConfig) -> int:
    """First ladder value at which one more round stops paying off.

    Flying is myopically worthwhile strictly below this value. If every rung
    still pays (e.g. crash-free missions), the threshold is the ladder top.
    """
    for sigma in cfg.rho.ladder[:-1]:
        if marginal_gain(sigma, cfg) <= 0:
            return sigma
    return cfg.rho.top


def closed_loop_decide(ctx: DecisionContext, cfg: MissionConfig) -> bool:
    """Feedback-based threshold rule: fly again iff the drone is intact, the
    round cap is not reached, and the junction value is below the myopic
    threshold."""
    if not ctx.feedback_available or ctx.sigma is None:
        raise ProtocolError("closed-loop rule needs feedback")
    return ctx.intact and ctx.rounds_flown < cfg.max_rounds and ctx.sigma < myopic_threshold(cfg)


def open_loop_heuristic_plan(cfg: MissionConfig) -> list[int]:
    """Fixed per-junction round counts that reach the myopic threshold in
    expectation: one certain first increase, then the expected number of
    rounds for the remaining increases."""
    threshold = myopic_threshold(cfg)
    first = cfg.rho.ladder[1] if len(cfg.rho.ladder) > 1 else cfg.rho.top
    needed = max(0, cfg.rho.index(threshold) - cfg.rho.index(first))
    if needed == 0:
        rounds = 1
    elif cfg.increase_prob == 0:
        rounds = cfg.max_rounds
    else:
        rounds = 1 + round(needed / cfg.increase_prob)
    return [min(rounds, cfg.max_rounds)] * cfg.num_junctions


@runtime_checkable
class MissionPolicy(Protocol):
    treatment: str

    def decide(self, ctx: DecisionContext) -> bool: ...


class ContextPolicy:
    """Base for stateless policies that are a pure function of the context."""

    treatment = CLOSED

    def begin_junction(self, junction: int) -> None:
        pass

    def observe(self, outcome: FlightOutcome) -> None:
        pass

    def bind_rng(self, rng: random.Random) -> None:
        pass

    def decision_fn(self, cfg: MissionConfig) -> Callable[[int, int, int], bool]:
        """Pure decision function (junction, rounds_flown, sigma) -> fly,
        assuming an intact drone. Required for exact evaluation."""
        raise NotImplementedError


class ClosedLoopHeuristicPolicy(ContextPolicy):
    """Fly until the myopic threshold is reached (or the cap bites)."""

    treatment = CLOSED

    def __init__(self, cfg: MissionConfig):
        self._cfg = cfg
        self._threshold = myopic_threshold(cfg)

    def decide(self, ctx: DecisionContext) -> bool:
        return closed_loop_decide(ctx, self._cfg)

    def decision_fn(self, cfg: MissionConfig) -> Callable[[int, int, int], bool]:
        threshold = myopic_threshold(cfg)
        return lambda j, i, sigma: i < cfg.max_rounds and sigma < threshold

    def __repr__(self) -> str:
        return f"ClosedLoopHeuristicPolicy(threshold={self._threshold})"


class ThresholdStopPolicy(ContextPolicy):
    """Fly until the junction value reaches ``stop_threshold``; a threshold
    below the myopic one models systematically early stopping."""

    treatment = CLOSED

    def __init__(self, cfg: MissionConfig, stop_threshold: int):
        if stop_threshold not in cfg.rho.ladder:
            raise DomainError(f"stop threshold {stop_threshold} is not on the ladder")
        self._cfg = cfg
        self.stop_threshold = stop_threshold

    def decide(self, ctx: DecisionContext) -> bool:
        if ctx.sigma is None:
            raise ProtocolError("threshold rule needs feedback")
        return (
            ctx.intact
            and ctx.rounds_flown < self._cfg.max_rounds
            and ctx.sigma < self.stop_threshold
        )

    def decision_fn(self, cfg: MissionConfig) -> Callable[[int, int, int], bool]:
        threshold = self.stop_threshold
        return lambda j, i, sigma: i < cfg.max_rounds and sigma < threshold


class FixedPlanPolicy(ContextPolicy):
    """Fly a predetermined number of rounds at each junction, ignoring any
    feedback. This is the shape of every open-loop strategy."""

    def __init__(self, plan: list[int], cfg: MissionConfig, treatment: str = OPEN):
        validate_plan(plan, cfg)
        self.planned_rounds = list(plan)
        self.treatment = treatment
        self._cfg = cfg

    def plan(self, cfg: MissionConfig) -> list[int]:
        return list(self.planned_rounds)

    def decide(self, ctx: DecisionContext) -> bool:
        return ctx.intact and ctx.rounds_flown < self.planned_rounds[ctx.junction - 1]

    def decision_fn(self, cfg: MissionConfig) -> Callable[[int, int, int], bool]:
        planned = list(self.planned_rounds)
        return lambda j, i, sigma: i < planned[j - 1]

    def __repr__(self) -> str:
        return f"FixedPlanPolicy({self.planned_rounds})"


def open_loop_heuristic_policy(cfg: MissionConfig) -> FixedPlanPolicy:
    return FixedPlanPolicy(open_loop_heuristic_plan(cfg), cfg, treatment=OPEN)


def always_fly_policy(cfg: MissionConfig) -> FixedPlanPolicy:
    """Fly the maximum number of rounds everywhere; the benchmark for the
    overall crash risk of ignoring the stopping problem."""
    return FixedPlanPolicy([cfg.max_rounds] * cfg.num_junctions, cfg, treatment=OPEN)


def validate_plan(plan: list[int], cfg: MissionConfig) -> None:
    if len(plan) != cfg.num_junctions:
        raise DomainError(
            f"plan must cover {cfg.num_junctions} junctions, got {len(plan)} entries"
        )
    for entry in plan:
        if not isinstance(entry, int) or isinstance(entry, bool):
            raise DomainError(f"plan entries must be integers, got {entry!r}")
        if not 0 <= entry <= cfg.max_rounds:
            raise DomainError(f"plan entries must be in 0..{cfg.max_rounds}, got {entry}")


def _junction_cap_reached(state: MissionState, cfg: MissionConfig) -> bool:
    return state.rounds_flown >= cfg.max_rounds or state.sigma == cfg.rho.top


def run_closed_mission(
    policy, cfg: MissionConfig, rng: random.Random
) -> MissionLog:
    """Drive a closed-loop mission: the policy sees full feedback after every
    flight and chooses fly or stop round by round."""
    state = MissionState()
    records: list[JunctionRecord] = []
    while not state.finished:
        junction = state.junction
        if hasattr(policy, "begin_junction"):
            policy.begin_junction(junction)
        flights: list[FlightOutcome] = []
        while not state.finished:
            if _junction_cap_reached(state, cfg):
                state = stop_junction(state, cfg)
                break
            ctx = DecisionContext(
                junction=junction,
                rounds_flown=state.rounds_flown,
                sigma=state.sigma,
                intact=state.intact,
                feedback_available=True,
            )
            if not policy.decide(ctx):
                state = stop_junction(state, cfg)
                break
            state, outcome = fly_once(state, cfg, rng)
            flights.append(outcome)
            if hasattr(policy, "observe"):
                policy.observe(outcome)
        info = flights[-1].sigma_after if flights else 0
        records.append(JunctionRecord(junction=junction, flights=tuple(flights), info=info))
    return MissionLog(
        config=cfg,
        junctions=tuple(records),
        intact=state.intact,
        total_value=final_value(state, cfg),
    )


def run_open_mission(plan: list[int], cfg: MissionConfig, rng: random.Random) -> MissionLog:
    """Realize an entire mission from an upfront plan; no decision is made
    after the plan is submitted."""
    validate_plan(plan, cfg)
    state = MissionState()
    records: list[JunctionRecord] = []
    while not state.finished:
        junction = state.junction
        planned = plan[junction - 1]
        flights: list[FlightOutcome] = []
        while not state.finished and state.rounds_flown < planned:
            if _junction_cap_reached(state, cfg):
                break
            state, outcome = fly_once(state, cfg, rng)
            flights.append(outcome)
        if not state.finished:
            state = stop_junction(state, cfg)
        info = flights[-1].sigma_after if flights else 0
        records.append(JunctionRecord(junction=junction, flights=tuple(flights), info=info))
    return MissionLog(
        config=cfg,
        junctions=tuple(records),
        intact=state.intact,
        total_value=final_value(state, cfg),
    )


def run_policy_mission(policy, cfg: MissionConfig, rng: random.Random) -> MissionLog:
    """Run one mission under either treatment."""
    if getattr(policy, "treatment", CLOSED) == OPEN:
        return run_open_mission(policy.plan(cfg), cfg, rng)
    return run_closed_mission(policy, cfg, rng)
