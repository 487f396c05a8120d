"""Session log schema shared by synthetic agents and the live service.

One session is one participant's complete record: treatment, every flight
outcome, the submitted plan (open loop), price-list choices, questionnaire,
and payoff. Logs are stored one JSON object per line; synthetic and live
sessions validate against the same schema, so the analysis pipeline ingests
either without knowing the source.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

from .config import MissionConfig
from .errors import SchemaError
from .mission import MissionLog

SCHEMA_VERSION = "dronelab-session/v1"

_QUESTIONNAIRE_KEYS = {"age", "gender", "difficulty", "strategy"}
_MPL_ROWS = 20


def flight_to_dict(flight) -> dict:
    return {
        "round": flight.round_index,
        "increased": flight.increased,
        "crashed": flight.crashed,
        "sigma_after": flight.sigma_after,
    }


def junctions_to_dicts(log: MissionLog) -> list[dict]:
    return [
        {
            "junction": rec.junction,
            "flights": [flight_to_dict(f) for f in rec.flights],
            "info": rec.info,
        }
        for rec in log.junctions
    ]


def build_session(
    *,
    session_id: str,
    treatment: str,
    config: MissionConfig,
    mission: MissionLog,
    rng_record: dict,
    participant_code: str | None = None,
    plan: list[int] | None = None,
    mpl_choices: list[bool] | None = None,
    questionnaire: dict | None = None,
    participant_index: int | None = None,
    mpl_outcome: dict | None = None,
    payoff_eur: float | None = None,
    flags: list[str] | None = None,
    agent_profile: dict | None = None,
) -> dict:
    session = {
        "schema": SCHEMA_VERSION,
        "session_id": session_id,
        "participant_code": participant_code,
        "treatment": treatment,
        "config": config.to_dict(),
        "rng": rng_record,
        "plan": plan,
        "junctions": junctions_to_dicts(mission),
        "intact": mission.intact,
        "total_value": mission.total_value,
        "mpl_choices": mpl_choices,
        "questionnaire": questionnaire,
        "participant_index": participant_index,
        "mpl_outcome": mpl_outcome,
        "payoff_eur": payoff_eur,
        "flags": flags or [],
    }
    if agent_profile is not None:
        session["agent_profile"] = agent_profile
    return session


def _fail(path: str, message: str):
    raise SchemaError(f"{path}: {message}")


def _expect(condition: bool, path: str, message: str) -> None:
    if not condition:
        _fail(path, message)


def validate_session(data: dict) -> MissionConfig:
    """Structural validation of one session log; returns the parsed config."""
    _expect(isinstance(data, dict), "$", "session must be an object")
    _expect(data.get("schema") == SCHEMA_VERSION, "schema", f"expected {SCHEMA_VERSION}")
    _expect(isinstance(data.get("session_id"), str) and data["session_id"], "session_id", "required")
    _expect(data.get("treatment") in ("closed", "open"), "treatment", "must be closed or open")
    code = data.get("participant_code")
    _expect(code is None or isinstance(code, str), "participant_code", "must be a string or null")

    try:
        cfg = MissionConfig.from_dict(data.get("config", {}))
    except Exception as exc:
        raise SchemaError(f"config: {exc}") from exc

    plan = data.get("plan")
    if data["treatment"] == "open":
        _expect(isinstance(plan, list), "plan", "open-loop sessions need a plan")
        _expect(len(plan) == cfg.num_junctions, "plan", f"needs {cfg.num_junctions} entries")
        for idx, entry in enumerate(plan):
            _expect(
                isinstance(entry, int) and 0 <= entry <= cfg.max_rounds,
                f"plan[{idx}]",
                f"must be an integer in 0..{cfg.max_rounds}",
            )
    else:
        _expect(plan is None, "plan", "closed-loop sessions carry no plan")

    junctions = data.get("junctions")
    _expect(isinstance(junctions, list) and junctions, "junctions", "must be a non-empty list")
    crashed_seen = False
    recomputed_total = 0
    for idx, rec in enumerate(junctions):
        path = f"junctions[{idx}]"
        _expect(isinstance(rec, dict), path, "must be an object")
        _expect(rec.get("junction") == idx + 1, f"{path}.junction", "junctions must be 1..k in order")
        _expect(not crashed_seen, path, "no junction may follow a crash")
        flights = rec.get("flights")
        _expect(isinstance(flights, list), f"{path}.flights", "must be a list")
        _expect(len(flights) <= cfg.max_rounds, f"{path}.flights", "exceeds the round cap")
        sigma = 0
        for fidx, flight in enumerate(flights):
            fpath = f"{path}.flights[{fidx}]"
            _expect(isinstance(flight, dict), fpath, "must be an object")
            _expect(flight.get("round") == fidx + 1, f"{fpath}.round", "rounds must be 1..n in order")
            increased = flight.get("increased")
            crashed = flight.get("crashed")
            _expect(isinstance(increased, bool), f"{fpath}.increased", "must be a boolean")
            _expect(isinstance(crashed, bool), f"{fpath}.crashed", "must be a boolean")
            if fidx == 0:
                _expect(increased, f"{fpath}.increased", "the first flight always increases")
            if increased:
                sigma = cfg.rho.next_value(sigma)
            _expect(
                flight.get("sigma_after") == sigma,
                f"{fpath}.sigma_after",
                f"does not follow the dynamics (expected {sigma})",
            )
            if crashed:
                _expect(fidx == len(flights) - 1, fpath, "flights continue after a crash")
                crashed_seen = True
        _expect(rec.get("info") == sigma, f"{path}.info", f"must equal the final value {sigma}")
        recomputed_total += sigma

    intact = data.get("intact")
    _expect(isinstance(intact, bool), "intact", "must be a boolean")
    _expect(intact != crashed_seen, "intact", "contradicts the flight records")
    if not crashed_seen:
        _expect(
            len(junctions) == cfg.num_junctions,
            "junctions",
            "an intact mission covers every junction",
        )
    if intact:
        recomputed_total += cfg.drone_value
    _expect(
        data.get("total_value") == recomputed_total,
        "total_value",
        f"accounting mismatch (expected {recomputed_total})",
    )

    mpl = data.get("mpl_choices")
    if mpl is not None:
        _expect(isinstance(mpl, list) and len(mpl) == _MPL_ROWS, "mpl_choices", "needs 20 booleans")
        _expect(all(isinstance(c, bool) for c in mpl), "mpl_choices", "entries must be booleans")

    questionnaire = data.get("questionnaire")
    if questionnaire is not None:
        _expect(isinstance(questionnaire, dict), "questionnaire", "must be an object")
        unknown = set(questionnaire) - _QUESTIONNAIRE_KEYS
        _expect(not unknown, "questionnaire", f"unknown fields {sorted(unknown)}")

    index = data.get("participant_index")
    _expect(
        index is None or (isinstance(index, int) and index >= 1),
        "participant_index",
        "must be a positive integer or null",
    )
    payoff = data.get("payoff_eur")
    _expect(
        payoff is None or (isinstance(payoff, (int, float)) and payoff >= 0),
        "payoff_eur",
        "must be a non-negative number or null",
    )
    outcome = data.get("mpl_outcome")
    if outcome is not None:
        _expect(isinstance(outcome, dict), "mpl_outcome", "must be an object")
        _expect(
            isinstance(outcome.get("row"), int) and 1 <= outcome["row"] <= _MPL_ROWS,
            "mpl_outcome.row",
            "must be in 1..20",
        )
    flags = data.get("flags", [])
    _expect(
        isinstance(flags, list) and all(isinstance(f, str) for f in flags),
        "flags",
        "must be a list of strings",
    )
    return cfg


def replay_total_value(data: dict) -> int:
    """Recompute the mission total from the flight outcomes alone."""
    cfg = MissionConfig.from_dict(data["config"])
    total = 0
    crashed = False
    for rec in data["junctions"]:
        sigma = 0
        for flight in rec["flights"]:
            if flight["increased"]:
                sigma = cfg.rho.next_value(sigma)
            crashed = crashed or flight["crashed"]
        total += sigma
    if not crashed:
        total += cfg.drone_value
    return total


def write_sessions(path: str | Path, sessions: Iterable[dict]) -> None:
    with Path(path).open("w", encoding="utf-8") as handle:
        for session in sessions:
            handle.write(json.dumps(session, sort_keys=True) + "\n")


def read_sessions(path: str | Path, validate: bool = True) -> list[dict]:
    sessions = []
    with Path(path).open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                session = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"line {lineno}: invalid JSON ({exc})") from exc
            if validate:
                try:
                    validate_session(session)
                except SchemaError as exc:
                    raise SchemaError(f"line {lineno}: {exc}") from exc
            sessions.append(session)
    return sessions
