/** Screen flow: the service phase is the source of truth, screens are a pure
 * projection of it, and navigation only ever moves forward. */

import type { Phase, Treatment } from "./api.js";

export type Screen =
  | "welcome"
  | "instructions"
  | "quiz"
  | "flying-closed"
  | "flying-open"
  | "mpl"
  | "questionnaire"
  | "result";

const SCREEN_ORDER: Screen[] = [
  "welcome",
  "instructions",
  "quiz",
  "flying-closed",
  "flying-open",
  "mpl",
  "questionnaire",
  "result",
];

export function screenForPhase(phase: Phase, treatment: Treatment): Screen {
  switch (phase) {
    case "instructions":
      return "instructions";
    case "quiz":
      return "quiz";
    case "flying":
      return treatment === "closed" ? "flying-closed" : "flying-open";
    case "mpl":
      return "mpl";
    case "questionnaire":
      return "questionnaire";
    case "done":
      return "result";
  }
}

export function screenIndex(screen: Screen): number {
  return SCREEN_ORDER.indexOf(screen);
}

/** Forward-only guard: moving to an earlier screen is never allowed. */
export function isForward(from: Screen | null, to: Screen): boolean {
  if (from === null) return true;
  if (from === to) return true;
  const a = screenIndex(from);
  const b = screenIndex(to);
  // the two flying variants occupy one logical slot
  if (from.startsWith("flying") && to.startsWith("flying")) return from === to;
  return b > a;
}

/** An eight-character alphanumeric participant code. */
export function randomParticipantCode(randomValue: () => number = Math.random): string {
  const alphabet = "ABCDEFGHJKLMNPQRSTUVWXYZ23456789";
  let code = "";
  for (let i = 0; i < 8; i += 1) {
    code += alphabet[Math.floor(randomValue() * alphabet.length)];
  }
  return code;
}

export function isValidParticipantCode(code: string): boolean {
  return /^[A-Za-z0-9]{8}$/.test(code);
}
