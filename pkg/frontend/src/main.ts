/** Application shell: the service holds the truth, this file fetches it and
 * routes to the matching screen. A refresh re-fetches the phase and lands on
 * the same screen; navigation never goes backwards. */

import { ApiClient, ApiError } from "./api.js";
import type { Instructions, SessionState, Treatment } from "./api.js";
import { clear, el } from "./dom.js";
import { isForward, screenForPhase, type Screen } from "./flow.js";
import { closedRoundView, type LastOutcome } from "./views/flying-closed.js";
import { openPlanView, planSubmittedView } from "./views/flying-open.js";
import { instructionsView } from "./views/instructions.js";
import { mplView } from "./views/mpl.js";
import { questionnaireView } from "./views/questionnaire.js";
import { quizView } from "./views/quiz.js";
import { resultView } from "./views/result.js";
import { welcomeView } from "./views/welcome.js";

const STORAGE_KEY = "dronelab.session";

export class App {
  private currentScreen: Screen | null = null;
  private instructions: Instructions | null = null;
  private lastOutcome: LastOutcome | null = null;
  private quizWrong: string[] = [];
  private planSubmitted = false;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly storage: Storage = sessionStorage,
  ) {}

  async start(): Promise<void> {
    const sessionId = this.storage.getItem(STORAGE_KEY);
    if (!sessionId) {
      this.show("welcome", welcomeView({ onStart: (code) => void this.createSession(code) }));
      return;
    }
    try {
      const state = await this.api.state(sessionId);
      await this.routeTo(state);
    } catch (error) {
      this.storage.removeItem(STORAGE_KEY);
      this.show("welcome", welcomeView({ onStart: (code) => void this.createSession(code) }));
      this.note(error);
    }
  }

  private sessionId(): string {
    const sessionId = this.storage.getItem(STORAGE_KEY);
    if (!sessionId) throw new Error("no active session");
    return sessionId;
  }

  private show(screen: Screen, view: HTMLElement): void {
    if (!isForward(this.currentScreen, screen)) {
      // The service phase never moves backwards; a stale view must not either.
      return;
    }
    this.currentScreen = screen;
    clear(this.root);
    this.root.append(view);
  }

  private note(error: unknown): void {
    const message =
      error instanceof ApiError ? `${error.code}: ${error.message}` : String(error);
    const banner = el("p", { class: "error banner", role: "alert" }, message);
    this.root.prepend(banner);
  }

  private async createSession(code: string): Promise<void> {
    const params = new URLSearchParams(window.location.search);
    const treatment = (params.get("treatment") as Treatment | null) ?? undefined;
    const seedRaw = params.get("seed");
    const seed = seedRaw === null ? undefined : Number(seedRaw);
    try {
      const created = await this.api.createSession(code, treatment, seed);
      this.storage.setItem(STORAGE_KEY, created.session_id);
      await this.routeTo(await this.api.state(created.session_id));
    } catch (error) {
      this.note(error);
    }
  }

  private async routeTo(state: SessionState): Promise<void> {
    const screen = screenForPhase(state.phase, state.treatment);
    switch (screen) {
      case "instructions":
        await this.showInstructions();
        return;
      case "quiz":
        await this.showQuiz();
        return;
      case "flying-closed":
        this.showClosed(state);
        return;
      case "flying-open":
        this.showOpen(state);
        return;
      case "mpl":
        await this.showMpl();
        return;
      case "questionnaire":
        this.showQuestionnaire();
        return;
      case "result":
        await this.showResult();
        return;
      default:
        return;
    }
  }

  private async refresh(): Promise<void> {
    await this.routeTo(await this.api.state(this.sessionId()));
  }

  private async ensureInstructions(): Promise<Instructions> {
    if (!this.instructions) {
      this.instructions = await this.api.instructions(this.sessionId());
    }
    return this.instructions;
  }

  private async showInstructions(): Promise<void> {
    const instructions = await this.ensureInstructions();
    this.show(
      "instructions",
      instructionsView(instructions, {
        onContinue: () =>
          void this.guard(async () => {
            await this.api.ackInstructions(this.sessionId());
            await this.refresh();
          }),
      }),
    );
  }

  private async showQuiz(): Promise<void> {
    const instructions = await this.ensureInstructions();
    this.show(
      "quiz",
      quizView(instructions.quiz, this.quizWrong, {
        onSubmit: (answers) =>
          void this.guard(async () => {
            const result = await this.api.submitQuiz(this.sessionId(), answers);
            this.quizWrong = result.wrong;
            if (result.passed) {
              await this.refresh();
            } else {
              this.currentScreen = null; // re-render the same screen with marks
              await this.showQuiz();
            }
          }),
      }),
    );
  }

  private showClosed(state: SessionState): void {
    const mission = state.mission;
    if (!mission) return;
    const total = Number(
      (this.instructions?.parameters as Record<string, number> | undefined)?.["num_junctions"] ?? 10,
    );
    const handlers = {
      onFly: () =>
        void this.guard(async () => {
          const view = await this.api.decide(this.sessionId(), true);
          this.lastOutcome = view.last_outcome ?? null;
          if (view.phase !== "flying") {
            // crash: show the final feedback with a single continue action
            this.show(
              "flying-closed",
              closedRoundView(view, this.lastOutcome, total, {
                ...handlers,
                onContinueAfterCrash: () => void this.guard(() => this.refresh()),
              }),
            );
            return;
          }
          this.currentScreen = null;
          this.show("flying-closed", closedRoundView(view, this.lastOutcome, total, handlers));
        }),
      onNextJunction: () =>
        void this.guard(async () => {
          const view = await this.api.decide(this.sessionId(), false);
          this.lastOutcome = null;
          if (view.phase !== "flying") {
            await this.refresh();
            return;
          }
          this.currentScreen = null;
          this.show("flying-closed", closedRoundView(view, null, total, handlers));
        }),
      onContinueAfterCrash: () => void this.guard(() => this.refresh()),
    };
    this.show("flying-closed", closedRoundView(mission, this.lastOutcome, total, handlers));
  }

  private showOpen(state: SessionState): void {
    if (state.plan_submitted || this.planSubmitted) {
      this.show(
        "flying-open",
        planSubmittedView({ onContinue: () => void this.guard(() => this.refresh()) }),
      );
      return;
    }
    const params = (this.instructions?.parameters ?? {}) as Record<string, number>;
    const numJunctions = Number(params["num_junctions"] ?? 10);
    const maxRounds = Number(params["max_rounds"] ?? 8);
    this.show(
      "flying-open",
      openPlanView(numJunctions, maxRounds, {
        onSubmit: (plan) =>
          void this.guard(async () => {
            await this.api.submitPlan(this.sessionId(), plan);
            this.planSubmitted = true;
            await this.refresh();
          }),
      }),
    );
  }

  private async showMpl(): Promise<void> {
    const instructions = await this.ensureInstructions();
    this.show(
      "mpl",
      mplView(instructions.mpl_rows, {
        onSubmit: (choices) =>
          void this.guard(async () => {
            await this.api.submitMpl(this.sessionId(), choices);
            await this.refresh();
          }),
      }),
    );
  }

  private showQuestionnaire(): void {
    this.show(
      "questionnaire",
      questionnaireView({
        onSubmit: (fields) =>
          void this.guard(async () => {
            await this.api.submitQuestionnaire(this.sessionId(), fields);
            await this.api.finalize(this.sessionId());
            await this.refresh();
          }),
      }),
    );
  }

  private async showResult(): Promise<void> {
    const result = await this.api.result(this.sessionId());
    this.show("result", resultView(result));
  }

  private async guard(action: () => Promise<void>): Promise<void> {
    try {
      await action();
    } catch (error) {
      if (error instanceof ApiError && error.code === "out_of_phase") {
        // The service moved on (double click, stale tab): follow it.
        await this.refresh();
        return;
      }
      this.note(error);
    }
  }
}

export function boot(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app container");
  const app = new App(root, new ApiClient(""));
  void app.start();
}

declare global {
  interface Window {
    __DRONELAB_NO_BOOT__?: boolean;
  }
}

if (typeof window !== "undefined" && !window.__DRONELAB_NO_BOOT__) {
  window.addEventListener("DOMContentLoaded", boot);
}
