"""Session lifecycle for live participants.

Phases run strictly forward: instructions, quiz, flying, price list,
questionnaire, done. The quiz gates the flying task behind four control
questions about the central parameters. Closed-loop sessions take one fly or
stop decision per round and receive the outcome immediately; open-loop
sessions submit the entire plan upfront, the mission is realized server-side
at once, and no outcome detail leaves the service before the session is
finalized. Every accepted request appends to the event journal; completed
sessions are snapshotted in the shared session-log schema.

Requests on one session are strictly serialized by a per-session lock; the
service as a whole handles many sessions concurrently.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field

from ..config import MissionConfig
from ..mission import JunctionRecord, MissionLog, MissionState, final_value, fly_once, stop_junction
from ..payoff import draw_mpl_row, mpl_payout_applies, mpl_rows, payoff_euro, play_mpl_row
from ..policies import CLOSED, OPEN, TREATMENTS, run_open_mission, validate_plan
from ..rng import derive_seed, make_stream, stream_record
from ..sessionlog import build_session
from .storage import EventLog, SnapshotStore

PHASES = ("instructions", "quiz", "flying", "mpl", "questionnaire", "done")

QUESTIONNAIRE_FIELDS = ("age", "gender", "difficulty", "strategy")


class ServiceError(Exception):
    """API-level failure with a machine-readable code."""

    def __init__(self, code: str, message: str, status: int = 400):
        super().__init__(message)
        self.code = code
        self.message = message
        self.status = status


def _not_found(session_id: str) -> ServiceError:
    return ServiceError("not_found", f"unknown session {session_id}", status=404)


def _out_of_phase(expected: str, actual: str) -> ServiceError:
    return ServiceError(
        "out_of_phase", f"request requires phase {expected!r}, session is in {actual!r}", status=409
    )


def _validation(message: str) -> ServiceError:
    return ServiceError("validation", message, status=400)


def quiz_questions(cfg: MissionConfig) -> list[dict]:
    """Control questions over the parameters every participant must know."""
    return [
        {
            "id": "crash_percent",
            "prompt": "What is the chance, in percent, that the drone crashes in a single flown round?",
            "answer": cfg.crash_prob * 100.0,
        },
        {
            "id": "drone_value",
            "prompt": "How many Taler does selling the intact drone earn at the end of the mission?",
            "answer": float(cfg.drone_value),
        },
        {
            "id": "max_rounds",
            "prompt": "How many rounds can the drone fly over one junction at most?",
            "answer": float(cfg.max_rounds),
        },
        {
            "id": "taler_per_euro",
            "prompt": "How many Taler are exchanged into one Euro?",
            "answer": float(cfg.taler_per_euro),
        },
    ]


def instructions_text(cfg: MissionConfig, treatment: str) -> str:
    feedback = (
        "After every round you immediately see whether the picture added information "
        "value, the junction's current total, and whether the drone is intact. You then "
        "decide round by round whether to fly again or move on."
        if treatment == CLOSED
        else "The drone stores its pictures on an internal memory chip that can only be "
        "read out after the mission. You therefore decide in advance how many rounds to "
        "fly over each junction and learn the results only once the whole mission is over."
    )
    return (
        f"You pilot a photo drone across {cfg.num_junctions} traffic junctions to gather "
        f"information for the city. At each junction the drone can fly up to "
        f"{cfg.max_rounds} rounds, taking one picture per round. The first picture of a "
        f"junction always adds information value; each further picture adds its value "
        f"with a {cfg.increase_prob:.0%} chance, and later pictures add less and less. "
        f"Every flown round carries a {cfg.crash_prob:.0%} risk that the drone crashes. "
        f"A crash ends the mission for all remaining junctions, but pictures taken so far "
        f"keep their value. If the drone survives the whole mission you sell it for "
        f"{cfg.drone_value} Taler. You are paid 1 Euro per {cfg.taler_per_euro} Taler of "
        f"total value. {feedback}"
    )


@dataclass
class _Runtime:
    """In-memory state of one live session."""

    session_id: str
    participant_code: str
    treatment: str
    seed: int
    phase: str = "instructions"
    created_at: float = field(default_factory=time.time)
    seq: int = 0
    quiz_passed: bool = False
    state: MissionState = field(default_factory=MissionState)
    current_flights: list = field(default_factory=list)
    records: list[JunctionRecord] = field(default_factory=list)
    mission: MissionLog | None = None
    plan: list[int] | None = None
    mpl_choices: list[bool] | None = None
    questionnaire: dict | None = None
    questionnaire_submitted: bool = False
    participant_index: int | None = None
    mpl_outcome: dict | None = None
    payoff_eur: float | None = None
    lock: threading.RLock = field(default_factory=threading.RLock)

    def __post_init__(self) -> None:
        self.rng = make_stream(self.seed)

    def next_seq(self) -> int:
        self.seq += 1
        return self.seq


class ExperimentService:
    """All session operations behind the HTTP API, usable directly in-process."""

    def __init__(
        self,
        cfg: MissionConfig | None = None,
        data_dir=None,
        service_seed: int | None = None,
        accepting: bool = True,
    ):
        self.cfg = cfg or MissionConfig()
        if data_dir is None:
            raise ValueError("data_dir is required")
        self.events = EventLog(data_dir / "events.jsonl")
        self.snapshots = SnapshotStore(data_dir / "sessions")
        if service_seed is None:
            service_seed = int(time.time_ns() % 2**63)
        self.service_seed = service_seed
        self._service_rng = make_stream(derive_seed(service_seed, "service"))
        self._sessions: dict[str, _Runtime] = {}
        self._codes: set[str] = set()
        self._lock = threading.Lock()
        self._created_count = 0
        self._completed_count = 0
        self._assignment_block: list[str] = []
        self.accepting = accepting

    # -- helpers -------------------------------------------------------

    def _session(self, session_id: str) -> _Runtime:
        with self._lock:
            runtime = self._sessions.get(session_id)
        if runtime is None:
            raise _not_found(session_id)
        return runtime

    def _require_phase(self, runtime: _Runtime, phase: str) -> None:
        if runtime.phase != phase:
            raise _out_of_phase(phase, runtime.phase)

    def _emit(self, runtime: _Runtime, kind: str, payload: dict) -> None:
        self.events.append(runtime.session_id, runtime.next_seq(), kind, payload)

    def _draw_treatment(self) -> str:
        # Balanced block randomization: every consecutive pair of random
        # assignments contains each treatment exactly once.
        if not self._assignment_block:
            block = [CLOSED, OPEN]
            self._service_rng.shuffle(block)
            self._assignment_block = block
        return self._assignment_block.pop()

    # -- session creation ----------------------------------------------

    def create_session(
        self,
        participant_code: str,
        treatment: str | None = None,
        seed: int | None = None,
    ) -> dict:
        if not self.accepting:
            raise ServiceError("not_accepting", "service is not accepting sessions", status=503)
        if not isinstance(participant_code, str) or len(participant_code) != 8 or not participant_code.isalnum():
            raise _validation("participant_code must be exactly 8 letters or digits")
        if treatment is not None and treatment not in TREATMENTS:
            raise _validation(f"treatment must be one of {TREATMENTS}")
        with self._lock:
            if participant_code.upper() in self._codes:
                raise _validation("participant_code is already in use")
            self._created_count += 1
            count = self._created_count
            assigned = treatment or self._draw_treatment()
            session_id = f"s{count:06d}-{self._service_rng.getrandbits(40):010x}"
            if seed is None:
                seed = derive_seed(self.service_seed, "session", count)
            runtime = _Runtime(
                session_id=session_id,
                participant_code=participant_code.upper(),
                treatment=assigned,
                seed=seed,
            )
            self._sessions[session_id] = runtime
            self._codes.add(runtime.participant_code)
        with runtime.lock:
            self._emit(
                runtime,
                "created",
                {
                    "participant_code": runtime.participant_code,
                    "treatment": runtime.treatment,
                    "rng": stream_record(seed),
                    "forced_treatment": treatment is not None,
                },
            )
            return {
                "session_id": session_id,
                "treatment": runtime.treatment,
                "phase": runtime.phase,
            }

    # -- read views ------------------------------------------------------

    def get_state(self, session_id: str) -> dict:
        runtime = self._session(session_id)
        with runtime.lock:
            view = {
                "session_id": runtime.session_id,
                "participant_code": runtime.participant_code,
                "treatment": runtime.treatment,
                "phase": runtime.phase,
            }
            if runtime.phase == "flying":
                if runtime.treatment == CLOSED:
                    view["mission"] = self._closed_view(runtime)
                else:
                    view["plan_submitted"] = runtime.plan is not None
            return view

    def get_instructions(self, session_id: str) -> dict:
        runtime = self._session(session_id)
        with runtime.lock:
            return {
                "session_id": runtime.session_id,
                "treatment": runtime.treatment,
                "phase": runtime.phase,
                "text": instructions_text(self.cfg, runtime.treatment),
                "parameters": {
                    "drone_value": self.cfg.drone_value,
                    "increase_prob": self.cfg.increase_prob,
                    "crash_prob": self.cfg.crash_prob,
                    "num_junctions": self.cfg.num_junctions,
                    "max_rounds": self.cfg.max_rounds,
                    "taler_per_euro": self.cfg.taler_per_euro,
                    "rho": self.cfg.rho.to_dict(),
                },
                "quiz": [
                    {"id": q["id"], "prompt": q["prompt"]} for q in quiz_questions(self.cfg)
                ],
                "mpl_rows": mpl_rows(),
            }

    def ack_instructions(self, session_id: str) -> dict:
        runtime = self._session(session_id)
        with runtime.lock:
            self._require_phase(runtime, "instructions")
            runtime.phase = "quiz"
            return {"phase": runtime.phase}

    # -- quiz ------------------------------------------------------------

    def submit_quiz(self, session_id: str, answers: dict) -> dict:
        runtime = self._session(session_id)
        with runtime.lock:
            self._require_phase(runtime, "quiz")
            if not isinstance(answers, dict):
                raise _validation("answers must be an object of question id to value")
            questions = quiz_questions(self.cfg)
            wrong = []
            for question in questions:
                value = answers.get(question["id"])
                try:
                    numeric = float(value)
                except (TypeError, ValueError):
                    numeric = None
                if numeric is None or abs(numeric - question["answer"]) > 1e-9:
                    wrong.append(question["id"])
            passed = not wrong
            self._emit(
                runtime,
                "quiz_answer",
                {"answers": answers, "wrong": wrong, "passed": passed},
            )
            if passed:
                runtime.quiz_passed = True
                runtime.phase = "flying"
            return {"passed": passed, "wrong": wrong, "phase": runtime.phase}

    # -- closed-loop flying ----------------------------------------------

    def _closed_view(self, runtime: _Runtime) -> dict:
        state = runtime.state
        return {
            "junction": state.junction,
            "rounds_flown": state.rounds_flown,
            "sigma": state.sigma,
            "intact": state.intact,
            "banked_info": state.banked_info,
            "can_fly": (
                state.intact
                and not state.finished
                and state.rounds_flown < self.cfg.max_rounds
                and state.sigma != self.cfg.rho.top
            ),
            "mission_finished": state.finished,
        }

    def _close_junction(self, runtime: _Runtime) -> None:
        state = runtime.state
        info = runtime.current_flights[-1].sigma_after if runtime.current_flights else 0
        runtime.records.append(
            JunctionRecord(
                junction=state.junction,
                flights=tuple(runtime.current_flights),
                info=info,
            )
        )
        runtime.current_flights = []

    def _finish_mission(self, runtime: _Runtime) -> None:
        runtime.mission = MissionLog(
            config=self.cfg,
            junctions=tuple(runtime.records),
            intact=runtime.state.intact,
            total_value=final_value(runtime.state, self.cfg),
        )
        runtime.phase = "mpl"

    def decide_round(self, session_id: str, fly: bool) -> dict:
        runtime = self._session(session_id)
        with runtime.lock:
            self._require_phase(runtime, "flying")
            if runtime.treatment != CLOSED:
                raise _validation("round decisions exist only in the closed-loop treatment")
            if not isinstance(fly, bool):
                raise _validation("fly must be a boolean")
            state = runtime.state
            if fly:
                if not state.intact:
                    raise ServiceError("crashed", "the drone has crashed; no more flights")
                if state.rounds_flown >= self.cfg.max_rounds:
                    raise _validation("the round cap is reached at this junction")
                if state.sigma == self.cfg.rho.top:
                    raise _validation("no picture can add information beyond the maximum")
                self._emit(runtime, "decision", {"fly": True, "junction": state.junction})
                new_state, outcome = fly_once(state, self.cfg, runtime.rng)
                runtime.state = new_state
                runtime.current_flights.append(outcome)
                self._emit(
                    runtime,
                    "flight_outcome",
                    {
                        "junction": outcome.junction,
                        "round": outcome.round_index,
                        "increased": outcome.increased,
                        "crashed": outcome.crashed,
                        "sigma_after": outcome.sigma_after,
                    },
                )
                if outcome.crashed:
                    self._close_junction(runtime)
                    self._finish_mission(runtime)
                view = self._closed_view(runtime)
                view["last_outcome"] = {
                    "increased": outcome.increased,
                    "crashed": outcome.crashed,
                    "sigma": outcome.sigma_after,
                }
                view["phase"] = runtime.phase
                return view
            self._emit(runtime, "decision", {"fly": False, "junction": state.junction})
            self._close_junction(runtime)
            runtime.state = stop_junction(state, self.cfg)
            if runtime.state.finished:
                self._finish_mission(runtime)
            view = self._closed_view(runtime)
            view["phase"] = runtime.phase
            return view

    # -- open-loop flying --------------------------------------------------

    def submit_plan(self, session_id: str, plan) -> dict:
        runtime = self._session(session_id)
        with runtime.lock:
            self._require_phase(runtime, "flying")
            if runtime.treatment != OPEN:
                raise _validation("plans exist only in the open-loop treatment")
            if runtime.plan is not None:
                raise _validation("a plan was already submitted")
            if not isinstance(plan, list):
                raise _validation("plan must be a list of round counts")
            try:
                validate_plan(plan, self.cfg)
            except Exception as exc:
                raise _validation(str(exc)) from exc
            runtime.plan = list(plan)
            self._emit(runtime, "plan_submitted", {"plan": runtime.plan})
            # The whole mission is realized now; outcomes stay server-side
            # until the session is finalized.
            mission = run_open_mission(runtime.plan, self.cfg, runtime.rng)
            runtime.mission = mission
            for rec in mission.junctions:
                for outcome in rec.flights:
                    self._emit(
                        runtime,
                        "flight_outcome",
                        {
                            "junction": outcome.junction,
                            "round": outcome.round_index,
                            "increased": outcome.increased,
                            "crashed": outcome.crashed,
                            "sigma_after": outcome.sigma_after,
                        },
                    )
            runtime.phase = "mpl"
            return {"accepted": True, "phase": runtime.phase}

    # -- price list, questionnaire, payoff ---------------------------------

    def submit_mpl(self, session_id: str, choices) -> dict:
        runtime = self._session(session_id)
        with runtime.lock:
            self._require_phase(runtime, "mpl")
            if not isinstance(choices, list) or len(choices) != 20:
                raise _validation("choices must be a list of 20 booleans (true = lottery)")
            if not all(isinstance(c, bool) for c in choices):
                raise _validation("choices must be booleans")
            runtime.mpl_choices = list(choices)
            self._emit(runtime, "mpl_choice", {"choices": runtime.mpl_choices})
            runtime.phase = "questionnaire"
            return {"phase": runtime.phase}

    def submit_questionnaire(self, session_id: str, fields: dict) -> dict:
        runtime = self._session(session_id)
        with runtime.lock:
            self._require_phase(runtime, "questionnaire")
            if not isinstance(fields, dict):
                raise _validation("questionnaire must be an object")
            unknown = set(fields) - set(QUESTIONNAIRE_FIELDS)
            if unknown:
                raise _validation(f"unknown questionnaire fields: {sorted(unknown)}")
            if runtime.questionnaire_submitted:
                raise _validation("questionnaire was already submitted")
            runtime.questionnaire = {key: fields.get(key) for key in QUESTIONNAIRE_FIELDS}
            runtime.questionnaire_submitted = True
            self._emit(runtime, "questionnaire", runtime.questionnaire)
            return {"phase": runtime.phase, "ready_to_finalize": True}

    def finalize(self, session_id: str) -> dict:
        runtime = self._session(session_id)
        with runtime.lock:
            self._require_phase(runtime, "questionnaire")
            if not runtime.questionnaire_submitted:
                raise _validation("submit the questionnaire before finalizing")
            with self._lock:
                self._completed_count += 1
                runtime.participant_index = self._completed_count
            mission = runtime.mission
            mpl_outcome_eur = None
            if mpl_payout_applies(runtime.participant_index, self.cfg):
                row = draw_mpl_row(runtime.rng)
                outcome = play_mpl_row(runtime.mpl_choices, row, runtime.rng)
                mpl_outcome_eur = outcome.amount_eur
                runtime.mpl_outcome = {
                    "row": outcome.row,
                    "chose_lottery": outcome.chose_lottery,
                    "lottery_won": outcome.lottery_won,
                    "amount_eur": outcome.amount_eur,
                }
            payoff = payoff_euro(
                mission.total_value, mpl_outcome_eur, runtime.participant_index, self.cfg
            )
            runtime.payoff_eur = float(payoff)
            runtime.phase = "done"
            self._emit(
                runtime,
                "payoff",
                {
                    "participant_index": runtime.participant_index,
                    "total_value": mission.total_value,
                    "mpl_outcome": runtime.mpl_outcome,
                    "payoff_eur": runtime.payoff_eur,
                },
            )
            self.snapshots.write(self._snapshot(runtime))
            return self.get_result(session_id)

    def get_result(self, session_id: str) -> dict:
        runtime = self._session(session_id)
        with runtime.lock:
            self._require_phase(runtime, "done")
            mission = runtime.mission
            info_total = sum(rec.info for rec in mission.junctions)
            return {
                "session_id": runtime.session_id,
                "treatment": runtime.treatment,
                "phase": runtime.phase,
                "information_value": info_total,
                "drone_intact": mission.intact,
                "drone_sale": self.cfg.drone_value if mission.intact else 0,
                "total_value": mission.total_value,
                "junction_infos": [rec.info for rec in mission.junctions],
                "participant_index": runtime.participant_index,
                "mpl_paid": runtime.mpl_outcome is not None,
                "mpl_outcome": runtime.mpl_outcome,
                "payoff_eur": runtime.payoff_eur,
            }

    # -- snapshots ---------------------------------------------------------

    def _snapshot(self, runtime: _Runtime) -> dict:
        flags = []
        if runtime.plan is not None and all(entry == 0 for entry in runtime.plan):
            flags.append("zero_flight_plan")
        return build_session(
            session_id=runtime.session_id,
            participant_code=runtime.participant_code,
            treatment=runtime.treatment,
            config=self.cfg,
            mission=runtime.mission,
            rng_record=stream_record(runtime.seed),
            plan=runtime.plan,
            mpl_choices=runtime.mpl_choices,
            questionnaire=runtime.questionnaire,
            participant_index=runtime.participant_index,
            mpl_outcome=runtime.mpl_outcome,
            payoff_eur=runtime.payoff_eur,
            flags=flags,
        )

    def completed_sessions(self) -> list[dict]:
        return self.snapshots.read_all()


def replay_value_from_events(events: list[dict], cfg: MissionConfig) -> int:
    """Rebuild a session's mission total from its journal alone.

    Walks the flight outcomes in sequence order through the ladder dynamics;
    the result must equal the snapshot's ``total_value``.
    """
    outcomes = sorted(
        (e for e in events if e["kind"] == "flight_outcome"), key=lambda e: e["seq"]
    )
    total = 0
    sigma = 0
    current_junction = None
    crashed = False
    for event in outcomes:
        payload = event["payload"]
        if payload["junction"] != current_junction:
            total += sigma
            sigma = 0
            current_junction = payload["junction"]
        if payload["increased"]:
            sigma = cfg.rho.next_value(sigma)
        if sigma != payload["sigma_after"]:
            raise ValueError(
                f"journal outcome at junction {payload['junction']} round {payload['round']} "
                f"does not follow the dynamics"
            )
        crashed = crashed or payload["crashed"]
    total += sigma
    if not crashed:
        total += cfg.drone_value
    return total
