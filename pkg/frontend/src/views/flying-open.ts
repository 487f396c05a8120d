import { el } from "../dom.js";

export interface OpenPlanHandlers {
  onSubmit: (plan: number[]) => void;
}

/** Upfront plan form: one round count per junction, a single submission
 * behind an explicit confirmation, and no outcome information whatsoever. */
export function openPlanView(
  numJunctions: number,
  maxRounds: number,
  handlers: OpenPlanHandlers,
): HTMLElement {
  const selects: HTMLSelectElement[] = [];
  const rows = [];
  for (let junction = 1; junction <= numJunctions; junction += 1) {
    const select = el("select", { id: `plan-${junction}`, "data-junction": String(junction) });
    for (let rounds = 0; rounds <= maxRounds; rounds += 1) {
      select.append(el("option", { value: String(rounds) }, String(rounds)));
    }
    selects.push(select);
    rows.push(
      el("label", { class: "plan-row" }, el("span", {}, `Junction ${junction}`), select),
    );
  }

  const confirmNote = el("p", { class: "hint", id: "confirm-note" });
  let armed = false;
  const submit = el(
    "button",
    {
      id: "submit-plan",
      onclick: () => {
        const plan = selects.map((select) => Number(select.value));
        if (!armed) {
          armed = true;
          confirmNote.textContent =
            `You are about to commit ${plan.reduce((a, b) => a + b, 0)} rounds in total. ` +
            "The plan cannot be changed afterwards and you will learn nothing until the whole mission is over. " +
            "Press again to confirm.";
          submit.textContent = "Confirm plan";
          return;
        }
        handlers.onSubmit(plan);
      },
    },
    "Submit plan",
  );
  for (const select of selects) {
    select.addEventListener("change", () => {
      armed = false;
      submit.textContent = "Submit plan";
      confirmNote.textContent = "";
    });
  }

  return el(
    "section",
    { class: "card", "data-screen": "flying-open" },
    el("h1", {}, "Plan the whole mission"),
    el(
      "p",
      {},
      "Decide now how many rounds the drone should fly over each junction. " +
        "The drone flies on its own; its memory chip can only be read out after the mission, " +
        "so there is no feedback in between.",
    ),
    ...rows,
    confirmNote,
    submit,
  );
}

/** Acknowledgment shown after the plan is accepted; deliberately empty of
 * any mission information. */
export function planSubmittedView(handlers: { onContinue: () => void }): HTMLElement {
  return el(
    "section",
    { class: "card", "data-screen": "flying-open" },
    el("h1", {}, "Plan received"),
    el("p", {}, "The drone is flying your plan. Results follow at the end of the session."),
    el("button", { id: "after-plan", onclick: () => handlers.onContinue() }, "Continue"),
  );
}
