import { el } from "../dom.js";

export interface QuestionnaireFields {
  age: number | null;
  gender: string | null;
  difficulty: number | null;
  strategy: string | null;
}

export function questionnaireView(handlers: {
  onSubmit: (fields: QuestionnaireFields) => void;
}): HTMLElement {
  const age = el("input", { type: "number", id: "q-age", min: "16", max: "120" });
  const gender = el("select", { id: "q-gender" });
  for (const [value, label] of [
    ["", "prefer not to say"],
    ["f", "female"],
    ["m", "male"],
    ["d", "diverse"],
  ]) {
    gender.append(el("option", { value: value as string }, label as string));
  }
  const difficulty = el("select", { id: "q-difficulty" });
  difficulty.append(el("option", { value: "" }, "choose"));
  for (let level = 1; level <= 7; level += 1) {
    difficulty.append(
      el("option", { value: String(level) }, `${level} ${level === 1 ? "(very easy)" : level === 7 ? "(very hard)" : ""}`),
    );
  }
  const strategy = el("textarea", {
    id: "q-strategy",
    rows: "4",
    placeholder: "How did you choose the number of rounds?",
  });

  return el(
    "section",
    { class: "card", "data-screen": "questionnaire" },
    el("h1", {}, "A few questions"),
    el("label", { class: "q-row" }, el("span", {}, "Age"), age),
    el("label", { class: "q-row" }, el("span", {}, "Gender"), gender),
    el("label", { class: "q-row" }, el("span", {}, "How difficult was the task?"), difficulty),
    el("label", { class: "q-row" }, el("span", {}, "Your strategy"), strategy),
    el(
      "button",
      {
        id: "submit-questionnaire",
        onclick: () =>
          handlers.onSubmit({
            age: age.value ? Number(age.value) : null,
            gender: gender.value || null,
            difficulty: difficulty.value ? Number(difficulty.value) : null,
            strategy: strategy.value || null,
          }),
      },
      "Submit and see the result",
    ),
  );
}
