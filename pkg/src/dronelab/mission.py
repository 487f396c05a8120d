"""Mission dynamics and value accounting.

A mission visits ``num_junctions`` junctions in order. At each junction the
drone may fly up to ``max_rounds`` rounds. Each flight takes one picture:
the first picture of a junction raises the junction's information value with
certainty, every later picture raises it with probability ``increase_prob``
along the ladder. After the picture is stored, the drone crashes with
probability ``crash_prob``; information gathered up to and including that
picture survives the crash (the memory chip is recovered), the drone itself
and all later junctions are lost.

All transitions are pure: they return new states and never mutate inputs.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from .config import MissionConfig
from .errors import DomainError, ProtocolError, StateError


@dataclass(frozen=True)
class FlightOutcome:
    """Result of one flight: junction, 1-based round, increase and crash flags,
    and the junction's information value after the picture."""

    junction: int
    round_index: int
    increased: bool
    crashed: bool
    sigma_after: int


@dataclass(frozen=True)
class MissionState:
    """Live state of one mission.

    ``sigma`` is the current junction's accumulated value (0 before its first
    flight); ``banked_info`` is the summed value of all closed junctions,
    including a junction closed by the crash itself.
    """

    junction: int = 1
    rounds_flown: int = 0
    sigma: int = 0
    intact: bool = True
    banked_info: int = 0
    finished: bool = False


@dataclass(frozen=True)
class JunctionRecord:
    junction: int
    flights: tuple[FlightOutcome, ...]
    info: int

    @property
    def crashed(self) -> bool:
        return bool(self.flights) and self.flights[-1].crashed

    @property
    def rounds_flown(self) -> int:
        return len(self.flights)


@dataclass(frozen=True)
class MissionLog:
    """Complete record of one finished mission."""

    config: MissionConfig
    junctions: tuple[JunctionRecord, ...]
    intact: bool
    total_value: int
    finished: bool = True


def _check_can_fly(state: MissionState, cfg: MissionConfig) -> None:
    if state.finished:
        raise ProtocolError("mission is finished; no more flights")
    if not state.intact:
        raise ProtocolError("drone has crashed; no more flights")
    if state.rounds_flown >= cfg.max_rounds:
        raise ProtocolError(
            f"round cap reached at junction {state.junction} ({cfg.max_rounds} rounds)"
        )
    if state.sigma == cfg.rho.top:
        raise DomainError(f"no picture can add value beyond {cfg.rho.top}")


def fly_once(
    state: MissionState, cfg: MissionConfig, rng: random.Random
) -> tuple[MissionState, FlightOutcome]:
    """Fly one round at the current junction.

    Consumes one uniform draw for the increase (none on the junction's first
    round, which succeeds with certainty) and one for the crash, in that
    order. Information gained on a crashing flight is retained.
    """
    _check_can_fly(state, cfg)
    if state.rounds_flown == 0:
        increased = True
    else:
        increased = rng.random() < cfg.increase_prob
    sigma_after = cfg.rho.next_value(state.sigma) if increased else state.sigma
    crashed = rng.random() < cfg.crash_prob

    outcome = FlightOutcome(
        junction=state.junction,
        round_index=state.rounds_flown + 1,
        increased=increased,
        crashed=crashed,
        sigma_after=sigma_after,
    )
    if crashed:
        new_state = replace(
            state,
            rounds_flown=state.rounds_flown + 1,
            sigma=sigma_after,
            intact=False,
            finished=True,
            banked_info=state.banked_info + sigma_after,
        )
    else:
        new_state = replace(
            state,
            rounds_flown=state.rounds_flown + 1,
            sigma=sigma_after,
        )
    return new_state, outcome


def stop_junction(state: MissionState, cfg: MissionConfig) -> MissionState:
    """Close the current junction, banking its value, and open the next one.

    Closing the last junction finishes the mission. Closing with zero flights
    is permitted and banks nothing.
    """
    if state.finished:
        raise ProtocolError("mission is finished")
    if not state.intact:
        raise ProtocolError("drone has crashed; the mission is over")
    banked = state.banked_info + state.sigma
    if state.junction >= cfg.num_junctions:
        return replace(state, banked_info=banked, finished=True)
    return replace(
        state,
        junction=state.junction + 1,
        rounds_flown=0,
        sigma=0,
        banked_info=banked,
    )


def final_value(state: MissionState, cfg: MissionConfig) -> int:
    """Total value of a finished mission: banked information plus the drone
    sale if it survived."""
    if not state.finished:
        raise StateError("mission is not finished")
    return state.banked_info + (cfg.drone_value if state.intact else 0)


def mission_value(log: MissionLog) -> int:
    """Total value of a finished mission log; cross-checked against the
    incremental accounting of its junction records."""
    if not log.finished:
        raise StateError("mission is not finished")
    total = sum(rec.info for rec in log.junctions)
    if log.intact:
        total += log.config.drone_value
    if total != log.total_value:
        raise StateError(
            f"log accounting mismatch: recomputed {total}, recorded {log.total_value}"
        )
    return total


def replay_flights(
    flights: list[tuple[bool, bool]], cfg: MissionConfig, junction: int = 1
) -> list[FlightOutcome]:
    """Recompute a junction's outcome sequence from (increased, crashed) pairs.

    Used to verify that logged ``sigma_after`` values follow the dynamics.
    """
    sigma = 0
    outcomes = []
    for idx, (increased, crashed) in enumerate(flights, start=1):
        if idx == 1 and not increased:
            raise DomainError("the first flight of a junction always increases")
        if increased:
            sigma = cfg.rho.next_value(sigma)
        outcomes.append(
            FlightOutcome(
                junction=junction,
                round_index=idx,
                increased=increased,
                crashed=crashed,
                sigma_after=sigma,
            )
        )
        if crashed and idx != len(flights):
            raise DomainError("flights continue after a crash")
    return outcomes
