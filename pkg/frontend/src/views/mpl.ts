import type { MplRow } from "../api.js";
import { el } from "../dom.js";

export interface MplHandlers {
  onSubmit: (choices: boolean[]) => void;
}

/** Twenty-row price list: option A is the safe amount, option B the constant
 * lottery; every row must be answered before submission unlocks. */
export function mplView(rows: MplRow[], handlers: MplHandlers): HTMLElement {
  const choices = new Array<boolean | null>(rows.length).fill(null);
  const submit = el("button", { id: "submit-mpl", disabled: true }, "Submit choices");

  const update = () => {
    const complete = choices.every((choice) => choice !== null);
    (submit as HTMLButtonElement).disabled = !complete;
  };
  submit.addEventListener("click", () => {
    if (choices.every((choice) => choice !== null)) {
      handlers.onSubmit(choices.map(Boolean));
    }
  });

  const table = el(
    "table",
    { class: "mpl" },
    el(
      "thead",
      {},
      el(
        "tr",
        {},
        el("th", {}, "Row"),
        el("th", {}, "Option A (safe)"),
        el("th", {}, "Option B (lottery)"),
      ),
    ),
  );
  const body = el("tbody", {});
  for (const row of rows) {
    const name = `mpl-row-${row.row}`;
    const safe = el("input", { type: "radio", name, "data-choice": "A" });
    const lottery = el("input", { type: "radio", name, "data-choice": "B" });
    safe.addEventListener("change", () => {
      choices[row.row - 1] = false;
      update();
    });
    lottery.addEventListener("change", () => {
      choices[row.row - 1] = true;
      update();
    });
    const percent = Math.round(row.lottery_win_prob * 100);
    body.append(
      el(
        "tr",
        {},
        el("td", {}, `${row.row})`),
        el("td", {}, el("label", {}, safe, ` ${row.safe_eur} Euro for sure`)),
        el(
          "td",
          {},
          el(
            "label",
            {},
            lottery,
            ` ${row.lottery_high_eur} Euro with ${percent}%, 0 Euro with ${100 - percent}%`,
          ),
        ),
      ),
    );
  }
  table.append(body);

  return el(
    "section",
    { class: "card", "data-screen": "mpl" },
    el("h1", {}, "Choice list"),
    el(
      "p",
      {},
      "For each row, choose the safe amount (A) or the lottery (B). " +
        "Some participants are paid one randomly drawn row for real.",
    ),
    table,
    submit,
  );
}
