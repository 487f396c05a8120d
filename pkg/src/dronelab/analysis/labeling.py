"""Per-junction decision labels, session confidence degrees, and hot-hand scan.

A junction decision is compared against the treatment's heuristic optimum:
flying past it is overconfident, stopping short of it is underconfident,
meeting it is optimal. In the closed loop the optimum is the feedback
threshold; in the open loop it is the heuristic plan length. Junctions cut
short by a crash carry no evidence of over-flying, so they count as optimal
if every observed decision was compliant; a junction whose very first flight
crashed offers no decision evidence at all and is unobservable.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..config import MissionConfig
from ..errors import DomainError
from ..policies import CLOSED, OPEN, myopic_threshold, open_loop_heuristic_plan

OVERCONFIDENT = "overconfident"
UNDERCONFIDENT = "underconfident"
OPTIMAL = "optimal"
UNOBSERVABLE = "unobservable"

CATEGORY_OPTIMAL = "optimal"
CATEGORY_RATHER_OVERCONFIDENT = "rather_overconfident"
CATEGORY_STRONGLY_OVERCONFIDENT = "strongly_overconfident"
CATEGORY_RATHER_UNDERCONFIDENT = "rather_underconfident"
CATEGORY_STRONGLY_UNDERCONFIDENT = "strongly_underconfident"
CATEGORY_MIXED = "mixed"
CATEGORY_EXCLUDED = "excluded"

CATEGORIES = (
    CATEGORY_OPTIMAL,
    CATEGORY_RATHER_OVERCONFIDENT,
    CATEGORY_STRONGLY_OVERCONFIDENT,
    CATEGORY_RATHER_UNDERCONFIDENT,
    CATEGORY_STRONGLY_UNDERCONFIDENT,
    CATEGORY_MIXED,
    CATEGORY_EXCLUDED,
)


@dataclass(frozen=True)
class JunctionLabel:
    label: str
    rounds_beyond_optimum: int


@dataclass(frozen=True)
class ConfidenceDegrees:
    """Shares of a session's observable junctions per label; the three degrees
    sum to one whenever any junction was observable."""

    overconfident: Fraction
    underconfident: Fraction
    optimal: Fraction
    observable_junctions: int

    @property
    def excluded(self) -> bool:
        return self.observable_junctions == 0


@dataclass(frozen=True)
class HotHandRecord:
    junction: int
    hot_hand_situation: bool
    fallacy: bool


def _label_closed(junction: dict, cfg: MissionConfig) -> JunctionLabel:
    threshold = myopic_threshold(cfg)
    flights = junction["flights"]
    if not flights:
        # A voluntary stop before the first flight: short of the optimum.
        return JunctionLabel(UNDERCONFIDENT, 0)
    beyond = 0
    sigma_before = 0
    for flight in flights:
        if sigma_before >= threshold:
            beyond += 1
        sigma_before = flight["sigma_after"]
    if beyond > 0:
        return JunctionLabel(OVERCONFIDENT, beyond)
    if flights[-1]["crashed"]:
        if len(flights) == 1:
            return JunctionLabel(UNOBSERVABLE, 0)
        return JunctionLabel(OPTIMAL, 0)
    final_sigma = flights[-1]["sigma_after"]
    if final_sigma < threshold and len(flights) < cfg.max_rounds:
        return JunctionLabel(UNDERCONFIDENT, 0)
    return JunctionLabel(OPTIMAL, 0)


def _label_open(planned: int, heuristic_rounds: int) -> JunctionLabel:
    beyond = planned - heuristic_rounds
    if beyond > 0:
        return JunctionLabel(OVERCONFIDENT, beyond)
    if beyond < 0:
        return JunctionLabel(UNDERCONFIDENT, beyond)
    return JunctionLabel(OPTIMAL, 0)


def label_junction(
    junction: dict,
    treatment: str,
    cfg: MissionConfig,
    plan_entry: int | None = None,
) -> JunctionLabel:
    """Label one junction's decision against the treatment heuristic."""
    if treatment == CLOSED:
        return _label_closed(junction, cfg)
    if treatment == OPEN:
        if plan_entry is None:
            raise DomainError("open-loop labelling needs the planned round count")
        heuristic_rounds = open_loop_heuristic_plan(cfg)[0]
        return _label_open(plan_entry, heuristic_rounds)
    raise DomainError(f"unknown treatment {treatment!r}")


def label_session(
    session: dict, cfg: MissionConfig | None = None, count_all_plans: bool = False
) -> list[JunctionLabel]:
    """Labels for every counted junction of one session.

    Open-loop sessions count junctions up to and including the crash junction
    by default, mirroring how played junctions enter the degree denominators;
    ``count_all_plans`` instead counts all planned junctions, which are
    observable decisions regardless of the crash.
    """
    cfg = cfg or MissionConfig.from_dict(session["config"])
    treatment = session["treatment"]
    if treatment == CLOSED:
        return [_label_closed(rec, cfg) for rec in session["junctions"]]
    plan = session["plan"]
    heuristic_rounds = open_loop_heuristic_plan(cfg)[0]
    counted = len(plan) if count_all_plans else len(session["junctions"])
    return [_label_open(plan[idx], heuristic_rounds) for idx in range(counted)]


def confidence_degrees(
    session: dict, cfg: MissionConfig | None = None, count_all_plans: bool = False
) -> ConfidenceDegrees:
    """Per-session shares of overconfident, underconfident, and optimal
    junctions among the observable ones. A session whose only junction
    crashed on its very first flight has nothing observable and is excluded."""
    labels = label_session(session, cfg, count_all_plans)
    observable = [lab for lab in labels if lab.label != UNOBSERVABLE]
    n = len(observable)
    if n == 0:
        zero = Fraction(0)
        return ConfidenceDegrees(zero, zero, zero, 0)
    counts = {OVERCONFIDENT: 0, UNDERCONFIDENT: 0, OPTIMAL: 0}
    for lab in observable:
        counts[lab.label] += 1
    return ConfidenceDegrees(
        overconfident=Fraction(counts[OVERCONFIDENT], n),
        underconfident=Fraction(counts[UNDERCONFIDENT], n),
        optimal=Fraction(counts[OPTIMAL], n),
        observable_junctions=n,
    )


def categorize(degrees: ConfidenceDegrees) -> str:
    """Map a session's degrees to its behavior category.

    Degrees above one half are strong, degrees in (1/3, 1/2] are rather;
    when both deviation degrees exceed one third the larger one wins and an
    exact tie is mixed. Deviating in at most a third of the junctions in
    either direction is mixed.
    """
    if degrees.excluded:
        return CATEGORY_EXCLUDED
    if degrees.optimal == 1:
        return CATEGORY_OPTIMAL
    third = Fraction(1, 3)
    half = Fraction(1, 2)
    oc, uc = degrees.overconfident, degrees.underconfident
    if oc > third or uc > third:
        if oc == uc:
            return CATEGORY_MIXED
        if oc > uc:
            return (
                CATEGORY_STRONGLY_OVERCONFIDENT if oc > half else CATEGORY_RATHER_OVERCONFIDENT
            )
        return (
            CATEGORY_STRONGLY_UNDERCONFIDENT if uc > half else CATEGORY_RATHER_UNDERCONFIDENT
        )
    return CATEGORY_MIXED


def hot_hand_scan(session: dict, cfg: MissionConfig | None = None, streak_len: int = 3) -> list[HotHandRecord]:
    """One record per started junction of a closed-loop session.

    A hot-hand situation is a junction opened by ``streak_len`` consecutive
    increases with the drone still intact at the resulting decision point;
    the fallacy is choosing to fly at least once more from that point.
    """
    if session["treatment"] != CLOSED:
        raise DomainError("hot-hand scanning needs per-round feedback; open-loop sessions have none")
    if streak_len < 1:
        raise DomainError("streak_len must be at least 1")
    cfg = cfg or MissionConfig.from_dict(session["config"])
    records = []
    for rec in session["junctions"]:
        flights = rec["flights"]
        if not flights:
            continue
        head = flights[:streak_len]
        situation = (
            len(flights) >= streak_len
            and streak_len < cfg.max_rounds
            and all(f["increased"] for f in head)
            and not any(f["crashed"] for f in head)
        )
        fallacy = situation and len(flights) > streak_len
        records.append(
            HotHandRecord(junction=rec["junction"], hot_hand_situation=situation, fallacy=fallacy)
        )
    return records
