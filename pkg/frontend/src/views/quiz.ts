import type { QuizQuestion } from "../api.js";
import { el } from "../dom.js";

export interface QuizHandlers {
  onSubmit: (answers: Record<string, number>) => void;
}

/** Four numeric control questions; wrong ones stay marked for the retry. */
export function quizView(
  questions: QuizQuestion[],
  wrong: string[],
  handlers: QuizHandlers,
): HTMLElement {
  const inputs = new Map<string, HTMLInputElement>();
  const rows = questions.map((question) => {
    const input = el("input", {
      type: "number",
      step: "any",
      id: `quiz-${question.id}`,
      "data-question": question.id,
    });
    inputs.set(question.id, input);
    const failed = wrong.includes(question.id);
    return el(
      "label",
      { class: failed ? "quiz-row wrong" : "quiz-row" },
      el("span", {}, question.prompt + (failed ? " (try again)" : "")),
      input,
    );
  });
  const error = el("p", { class: "error", role: "alert" });
  const submit = el(
    "button",
    {
      id: "submit-quiz",
      onclick: () => {
        const answers: Record<string, number> = {};
        for (const [id, input] of inputs) {
          if (input.value.trim() === "") {
            error.textContent = "Please answer every question.";
            return;
          }
          answers[id] = Number(input.value);
        }
        error.textContent = "";
        handlers.onSubmit(answers);
      },
    },
    "Check answers",
  );
  return el(
    "section",
    { class: "card", "data-screen": "quiz" },
    el("h1", {}, "Control questions"),
    ...rows,
    error,
    submit,
  );
}
