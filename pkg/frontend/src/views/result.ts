import type { SessionResult } from "../api.js";
import { el } from "../dom.js";

export function resultView(result: SessionResult): HTMLElement {
  const rows = [
    el("dt", {}, "Information value gathered"),
    el("dd", { id: "result-info" }, `${result.information_value} Taler`),
    el("dt", {}, "Drone"),
    el(
      "dd",
      { id: "result-drone" },
      result.drone_intact ? `intact, sold for ${result.drone_sale} Taler` : "crashed (no sale)",
    ),
    el("dt", {}, "Total value"),
    el("dd", { id: "result-total" }, `${result.total_value} Taler`),
    el("dt", {}, "Your payment"),
    el("dd", { id: "result-payoff" }, `${result.payoff_eur.toFixed(2)} Euro`),
  ];
  if (result.mpl_paid && result.mpl_outcome) {
    const outcome = result.mpl_outcome;
    rows.push(
      el("dt", {}, "Choice list payout"),
      el(
        "dd",
        { id: "result-mpl" },
        `row ${outcome.row} was drawn; your ${outcome.chose_lottery ? "lottery" : "safe"} choice paid ${outcome.amount_eur} Euro (included above)`,
      ),
    );
  }
  const junctions = el(
    "p",
    { class: "hint", id: "result-junctions" },
    `Per junction: ${result.junction_infos.join(", ")}`,
  );
  return el(
    "section",
    { class: "card", "data-screen": "result" },
    el("h1", {}, "Mission result"),
    el("dl", { class: "status" }, ...rows),
    junctions,
    el(
      "p",
      {},
      "Thank you for taking part. Collect your payment by stating your participant code.",
    ),
  );
}
