import type { Instructions } from "../api.js";
import { el } from "../dom.js";

export function instructionsView(
  instructions: Instructions,
  handlers: { onContinue: () => void },
): HTMLElement {
  const params = instructions.parameters as Record<string, number>;
  const facts = el(
    "ul",
    { class: "facts" },
    el("li", {}, `Junctions to survey: ${params["num_junctions"]}`),
    el("li", {}, `Rounds per junction: up to ${params["max_rounds"]}`),
    el("li", {}, `Crash risk per flown round: ${(Number(params["crash_prob"]) * 100).toFixed(0)}%`),
    el("li", {}, `Drone sale value if intact at the end: ${params["drone_value"]} Taler`),
    el("li", {}, `Exchange rate: ${params["taler_per_euro"]} Taler = 1 Euro`),
  );
  return el(
    "section",
    { class: "card", "data-screen": "instructions" },
    el("h1", {}, "Your mission"),
    el("p", { class: "prose" }, instructions.text),
    facts,
    el(
      "p",
      { class: "hint" },
      "Next you will answer four control questions about these numbers. You can only fly once all four are correct.",
    ),
    el("button", { id: "to-quiz", onclick: () => handlers.onContinue() }, "To the control questions"),
  );
}
