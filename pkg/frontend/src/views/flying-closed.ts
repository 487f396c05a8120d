import type { ClosedMissionView } from "../api.js";
import { el } from "../dom.js";

export interface ClosedRoundHandlers {
  onFly: () => void;
  onNextJunction: () => void;
  onContinueAfterCrash: () => void;
}

export interface LastOutcome {
  increased: boolean;
  crashed: boolean;
  sigma: number;
}

/** Round-by-round cockpit: current feedback, then exactly two actions. */
export function closedRoundView(
  mission: ClosedMissionView,
  lastOutcome: LastOutcome | null,
  totalJunctions: number,
  handlers: ClosedRoundHandlers,
): HTMLElement {
  const crashed = !mission.intact;
  const status = el(
    "dl",
    { class: "status" },
    el("dt", {}, "Junction"),
    el("dd", { id: "status-junction" }, `${mission.junction} of ${totalJunctions}`),
    el("dt", {}, "Rounds flown here"),
    el("dd", { id: "status-rounds" }, String(mission.rounds_flown)),
    el("dt", {}, "Information value here"),
    el("dd", { id: "status-sigma" }, String(mission.sigma)),
    el("dt", {}, "Banked from earlier junctions"),
    el("dd", { id: "status-banked" }, String(mission.banked_info)),
    el("dt", {}, "Drone"),
    el("dd", { id: "status-drone" }, crashed ? "crashed" : "intact"),
  );

  let feedback: HTMLElement | null = null;
  if (lastOutcome) {
    feedback = el(
      "p",
      {
        id: "round-feedback",
        class: lastOutcome.crashed ? "feedback crashed" : lastOutcome.increased ? "feedback gained" : "feedback flat",
      },
      lastOutcome.crashed
        ? `The drone crashed. The pictures taken are safe on the memory chip (this junction banked ${lastOutcome.sigma}).`
        : lastOutcome.increased
          ? `The last picture added value: this junction now stands at ${lastOutcome.sigma}.`
          : `No added value from the last picture; the junction stays at ${lastOutcome.sigma}.`,
    );
  }

  if (crashed) {
    return el(
      "section",
      { class: "card", "data-screen": "flying-closed" },
      el("h1", {}, "Mission over"),
      feedback,
      status,
      el(
        "button",
        { id: "after-crash", onclick: () => handlers.onContinueAfterCrash() },
        "Continue",
      ),
    );
  }

  const fly = el(
    "button",
    { id: "fly-again", disabled: !mission.can_fly, onclick: () => handlers.onFly() },
    "Fly another round",
  );
  const next = el(
    "button",
    { id: "next-junction", class: "secondary", onclick: () => handlers.onNextJunction() },
    mission.junction >= totalJunctions ? "Finish mission" : "Move to the next junction",
  );
  return el(
    "section",
    { class: "card", "data-screen": "flying-closed" },
    el("h1", {}, "Flying"),
    feedback,
    status,
    el("div", { class: "row" }, fly, next),
    mission.can_fly
      ? null
      : el("p", { class: "hint" }, "No further rounds are possible at this junction."),
  );
}
