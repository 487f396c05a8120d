import { el } from "../dom.js";
import { isValidParticipantCode, randomParticipantCode } from "../flow.js";

export interface WelcomeHandlers {
  onStart: (code: string) => void;
}

/** ID-code creation: the code is the participant's anonymous payout key. */
export function welcomeView(handlers: WelcomeHandlers): HTMLElement {
  const input = el("input", {
    id: "participant-code",
    type: "text",
    maxlength: "8",
    placeholder: "8 letters or digits",
    autocomplete: "off",
  });
  const hint = el("p", { class: "hint" },
    "Create a personal 8-character code (letters and digits). You will need it to collect your payment; it is never linked to your name.");
  const error = el("p", { class: "error", role: "alert" });

  const start = el(
    "button",
    {
      id: "start-session",
      onclick: () => {
        const code = input.value.trim().toUpperCase();
        if (!isValidParticipantCode(code)) {
          error.textContent = "The code must be exactly 8 letters or digits.";
          return;
        }
        error.textContent = "";
        handlers.onStart(code);
      },
    },
    "Start",
  );
  const generate = el(
    "button",
    {
      id: "generate-code",
      class: "secondary",
      onclick: () => {
        input.value = randomParticipantCode();
      },
    },
    "Suggest a code",
  );

  return el(
    "section",
    { class: "card", "data-screen": "welcome" },
    el("h1", {}, "Drone surveillance mission"),
    el("p", {}, "Welcome. Before the briefing, create your participant code."),
    hint,
    el("div", { class: "row" }, input, generate),
    error,
    start,
  );
}
