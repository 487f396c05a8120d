"""Synthetic decision makers with planted behavioral patterns.

Each profile reproduces one decision pattern so the analysis pipeline can be
validated against populations whose ground truth is known by construction:

* ``optimizer``       follows the treatment's heuristic exactly.
* ``overconfident``   follows the heuristic, then flies a fixed (or drawn)
                      number of extra rounds once the threshold is reached;
                      in the open loop it plans that many rounds beyond the
                      heuristic plan.
* ``underconfident``  stops at a lower threshold (closed) or plans fewer
                      rounds (open).
* ``hot_hand``        follows the heuristic unless the junction opened with a
                      run of consecutive increases, after which it keeps
                      flying with a configured probability each round. A
                      ``stop_after_streak`` switch inverts this into the
                      opposite pattern (stop as soon as the streak completes);
                      it is off by default.
* ``open_loop_fixed`` flies a constant number of rounds everywhere.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .config import MissionConfig
from .errors import ConfigError
from .mission import FlightOutcome
from .payoff import draw_mpl_row, mpl_payout_applies, payoff_euro, play_mpl_row
from .policies import (
    CLOSED,
    OPEN,
    TREATMENTS,
    ClosedLoopHeuristicPolicy,
    DecisionContext,
    FixedPlanPolicy,
    ThresholdStopPolicy,
    myopic_threshold,
    open_loop_heuristic_plan,
    run_policy_mission,
)
from .rng import derive_seed, make_stream, stream_record
from .sessionlog import build_session

PROFILE_KINDS = ("optimizer", "overconfident", "underconfident", "hot_hand", "open_loop_fixed")


@dataclass(frozen=True)
class BiasProfile:
    """Parameters of one synthetic decision maker."""

    kind: str
    extra_rounds: int = 2
    extra_rounds_choices: tuple[int, ...] | None = None
    stop_threshold: int = 50
    continue_prob: float = 1.0
    streak_len: int = 3
    stop_after_streak: bool = False
    planned_rounds: int | None = None
    mpl_switch_row: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in PROFILE_KINDS:
            raise ConfigError(f"unknown profile kind {self.kind!r}")
        if self.extra_rounds < 0:
            raise ConfigError("extra_rounds must be non-negative")
        if self.extra_rounds_choices is not None:
            object.__setattr__(self, "extra_rounds_choices", tuple(self.extra_rounds_choices))
            if not self.extra_rounds_choices or any(k < 0 for k in self.extra_rounds_choices):
                raise ConfigError("extra_rounds_choices must be non-negative counts")
        if not 0.0 <= self.continue_prob <= 1.0:
            raise ConfigError("continue_prob must be in [0, 1]")
        if self.streak_len < 1:
            raise ConfigError("streak_len must be at least 1")
        if self.mpl_switch_row is not None and not 1 <= self.mpl_switch_row <= 21:
            raise ConfigError("mpl_switch_row must be in 1..21 (21 means never switching)")

    def to_dict(self) -> dict:
        data = {"kind": self.kind}
        if self.kind == "overconfident":
            data["extra_rounds"] = self.extra_rounds
            if self.extra_rounds_choices is not None:
                data["extra_rounds_choices"] = list(self.extra_rounds_choices)
        elif self.kind == "underconfident":
            data["stop_threshold"] = self.stop_threshold
            if self.planned_rounds is not None:
                data["planned_rounds"] = self.planned_rounds
        elif self.kind == "hot_hand":
            data["continue_prob"] = self.continue_prob
            data["streak_len"] = self.streak_len
            data["stop_after_streak"] = self.stop_after_streak
        elif self.kind == "open_loop_fixed":
            data["planned_rounds"] = self.planned_rounds
        if self.mpl_switch_row is not None:
            data["mpl_switch_row"] = self.mpl_switch_row
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "BiasProfile":
        known = {
            "kind",
            "extra_rounds",
            "extra_rounds_choices",
            "stop_threshold",
            "continue_prob",
            "streak_len",
            "stop_after_streak",
            "planned_rounds",
            "mpl_switch_row",
        }
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown profile keys: {sorted(unknown)}")
        kwargs = dict(data)
        if "extra_rounds_choices" in kwargs and kwargs["extra_rounds_choices"] is not None:
            kwargs["extra_rounds_choices"] = tuple(kwargs["extra_rounds_choices"])
        return cls(**kwargs)


class OverconfidentPolicy:
    """Threshold rule plus a set number of extra flights once it is reached."""

    treatment = CLOSED

    def __init__(self, cfg: MissionConfig, profile: BiasProfile, rng: random.Random | None = None):
        self._cfg = cfg
        self._threshold = myopic_threshold(cfg)
        self._profile = profile
        self._rng = rng
        self._threshold_round: int | None = None
        self._extras_target = profile.extra_rounds

    def bind_rng(self, rng: random.Random) -> None:
        self._rng = rng

    def begin_junction(self, junction: int) -> None:
        self._threshold_round = None
        if self._profile.extra_rounds_choices is not None:
            if self._rng is None:
                raise ConfigError("per-junction extra rounds need a bound rng")
            self._extras_target = self._rng.choice(self._profile.extra_rounds_choices)
        else:
            self._extras_target = self._profile.extra_rounds

    def observe(self, outcome: FlightOutcome) -> None:
        if self._threshold_round is None and outcome.sigma_after >= self._threshold:
            self._threshold_round = outcome.round_index

    def decide(self, ctx: DecisionContext) -> bool:
        if not ctx.intact or ctx.rounds_flown >= self._cfg.max_rounds:
            return False
        if ctx.sigma is None:
            raise ConfigError("overconfident policy needs feedback")
        if ctx.sigma < self._threshold:
            return True
        extras_flown = ctx.rounds_flown - (self._threshold_round or ctx.rounds_flown)
        return extras_flown < self._extras_target


class HotHandPolicy:
    """Threshold rule, except a junction-opening streak of increases makes the
    agent keep flying with probability ``continue_prob`` each round."""

    treatment = CLOSED

    def __init__(self, cfg: MissionConfig, profile: BiasProfile, rng: random.Random | None = None):
        self._cfg = cfg
        self._threshold = myopic_threshold(cfg)
        self._profile = profile
        self._rng = rng
        self._leading_streak = 0
        self._broken = False

    def bind_rng(self, rng: random.Random) -> None:
        self._rng = rng

    def begin_junction(self, junction: int) -> None:
        self._leading_streak = 0
        self._broken = False

    def observe(self, outcome: FlightOutcome) -> None:
        if not self._broken and outcome.increased and outcome.round_index == self._leading_streak + 1:
            self._leading_streak += 1
        else:
            self._broken = True

    def decide(self, ctx: DecisionContext) -> bool:
        if not ctx.intact or ctx.rounds_flown >= self._cfg.max_rounds:
            return False
        if ctx.sigma is None:
            raise ConfigError("hot-hand policy needs feedback")
        if self._leading_streak >= self._profile.streak_len:
            if self._profile.stop_after_streak:
                return False
            if self._profile.continue_prob >= 1.0:
                return True
            if self._profile.continue_prob <= 0.0:
                return False
            if self._rng is None:
                raise ConfigError("a randomized hot-hand policy needs a bound rng")
            return self._rng.random() < self._profile.continue_prob
        return ctx.sigma < self._threshold


def make_policy(
    profile: BiasProfile,
    treatment: str,
    cfg: MissionConfig,
    rng: random.Random | None = None,
):
    """Instantiate the decision maker for one profile under one treatment."""
    if treatment not in TREATMENTS:
        raise ConfigError(f"unknown treatment {treatment!r}")
    base_plan = open_loop_heuristic_plan(cfg)

    if profile.kind == "optimizer":
        if treatment == CLOSED:
            return ClosedLoopHeuristicPolicy(cfg)
        return FixedPlanPolicy(base_plan, cfg, treatment=OPEN)

    if profile.kind == "overconfident":
        if treatment == CLOSED:
            return OverconfidentPolicy(cfg, profile, rng)
        if profile.extra_rounds_choices is not None:
            if rng is None:
                raise ConfigError("per-junction extra rounds need an rng")
            extras = [rng.choice(profile.extra_rounds_choices) for _ in base_plan]
        else:
            extras = [profile.extra_rounds] * len(base_plan)
        plan = [min(base + k, cfg.max_rounds) for base, k in zip(base_plan, extras)]
        return FixedPlanPolicy(plan, cfg, treatment=OPEN)

    if profile.kind == "underconfident":
        if treatment == CLOSED:
            if profile.stop_threshold >= myopic_threshold(cfg):
                raise ConfigError("an underconfident stop threshold must sit below the optimum")
            return ThresholdStopPolicy(cfg, profile.stop_threshold)
        planned = profile.planned_rounds
        if planned is None:
            planned = max(base_plan[0] - 2, 0)
        if planned >= base_plan[0]:
            raise ConfigError("an underconfident plan must fall short of the heuristic plan")
        return FixedPlanPolicy([planned] * cfg.num_junctions, cfg, treatment=OPEN)

    if profile.kind == "hot_hand":
        if treatment != CLOSED:
            raise ConfigError("the hot-hand pattern needs feedback; it has no open-loop form")
        return HotHandPolicy(cfg, profile, rng)

    if profile.kind == "open_loop_fixed":
        if profile.planned_rounds is None:
            raise ConfigError("open_loop_fixed needs planned_rounds")
        return FixedPlanPolicy(
            [profile.planned_rounds] * cfg.num_junctions, cfg, treatment=treatment
        )

    raise ConfigError(f"unknown profile kind {profile.kind!r}")


@dataclass(frozen=True)
class PopulationGroup:
    profile: BiasProfile
    count: int
    treatment: str

    def __post_init__(self) -> None:
        if self.count < 0:
            raise ConfigError("group count must be non-negative")
        if self.treatment not in TREATMENTS:
            raise ConfigError(f"unknown treatment {self.treatment!r}")


@dataclass(frozen=True)
class PopulationSpec:
    """Declarative description of a synthetic participant population."""

    groups: tuple[PopulationGroup, ...]
    master_seed: int = 0
    config: MissionConfig = field(default_factory=MissionConfig)

    @classmethod
    def from_dict(cls, data: dict) -> "PopulationSpec":
        known = {"seed", "config", "groups"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown population keys: {sorted(unknown)}")
        cfg = MissionConfig.from_dict(data.get("config", {}))
        groups = []
        for entry in data.get("groups", []):
            extra = set(entry) - {"profile", "count", "treatment"}
            if extra:
                raise ConfigError(f"unknown group keys: {sorted(extra)}")
            groups.append(
                PopulationGroup(
                    profile=BiasProfile.from_dict(entry["profile"]),
                    count=int(entry["count"]),
                    treatment=entry["treatment"],
                )
            )
        if not groups:
            raise ConfigError("population needs at least one group")
        return cls(groups=tuple(groups), master_seed=int(data.get("seed", 0)), config=cfg)

    @classmethod
    def load(cls, path: str | Path) -> "PopulationSpec":
        with Path(path).open("r", encoding="utf-8") as handle:
            return cls.from_dict(json.load(handle))


def _mpl_choices(switch_row: int | None) -> list[bool] | None:
    # Lottery (True) up to the switch row, safe choices from there on.
    if switch_row is None:
        return None
    return [row < switch_row for row in range(1, 21)]


def _participant_code(seed: int) -> str:
    return f"{seed % 16**8:08X}"


def generate_sessions(spec: PopulationSpec) -> list[dict]:
    """One complete session log per agent, byte-deterministic in the master seed."""
    cfg = spec.config
    sessions = []
    participant_index = 0
    for group_idx, group in enumerate(spec.groups):
        for agent_idx in range(group.count):
            participant_index += 1
            seed = derive_seed(spec.master_seed, "agent", group_idx, agent_idx)
            rng = make_stream(seed)
            policy = make_policy(group.profile, group.treatment, cfg, rng=rng)
            mission = run_policy_mission(policy, cfg, rng)

            choices = _mpl_choices(group.profile.mpl_switch_row)
            outcome_dict = None
            outcome_eur = None
            if choices is not None and mpl_payout_applies(participant_index, cfg):
                row = draw_mpl_row(rng)
                outcome = play_mpl_row(choices, row, rng)
                outcome_eur = outcome.amount_eur
                outcome_dict = {
                    "row": outcome.row,
                    "chose_lottery": outcome.chose_lottery,
                    "lottery_won": outcome.lottery_won,
                    "amount_eur": outcome.amount_eur,
                }
            payoff = payoff_euro(mission.total_value, outcome_eur, participant_index, cfg)

            flags = []
            plan = policy.planned_rounds if group.treatment == OPEN else None
            if plan is not None and all(entry == 0 for entry in plan):
                flags.append("zero_flight_plan")

            sessions.append(
                build_session(
                    session_id=f"agent-{group_idx:02d}-{agent_idx:05d}",
                    participant_code=_participant_code(seed),
                    treatment=group.treatment,
                    config=cfg,
                    mission=mission,
                    rng_record=stream_record(seed),
                    plan=list(plan) if plan is not None else None,
                    mpl_choices=choices,
                    questionnaire=None,
                    participant_index=participant_index,
                    mpl_outcome=outcome_dict,
                    payoff_eur=float(payoff),
                    flags=flags,
                    agent_profile={
                        **group.profile.to_dict(),
                        "treatment": group.treatment,
                        "group": group_idx,
                    },
                )
            )
    return sessions
